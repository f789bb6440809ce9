//! Acceptance suite. Runs without the libtest harness so that every criterion
//! prints its own PASS/FAIL line; exits non-zero if any criterion fails.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bergman_core::cylinder::{rho_cyl_direct, rho_cyl_poisson, CylinderParams};
use bergman_core::extrema::{compare_bundles, find_extrema, localization_sweep, pushforward_fit, solve_holonomy, HolonomyTarget, Verdict};
use bergman_core::holonomy::{calibration_sign, hol_closed, hol_ode};
use bergman_core::kernel::{integral_check, offdiag_bound, rho_diag, tail_bound, KernelSeries};
use bergman_core::theta::{torus_from_tau, ThetaOracle};
use bergman_core::{Execution, PolarizedTorus, Semicharacter};
use common::{c, circ, d2, siegel2, sq1};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Outcome { pass, detail }
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_point(r: &mut ChaCha8Rng, rank: usize) -> Vec<f64> {
    (0..rank).map(|_| r.gen::<f64>()).collect()
}

fn random_chi(r: &mut ChaCha8Rng, rank: usize) -> Semicharacter {
    Semicharacter::new(random_point(r, rank))
}

fn random_torus(r: &mut ChaCha8Rng) -> PolarizedTorus {
    if r.gen_bool(0.25) {
        let x = [r.gen_range(-0.3..0.3), r.gen_range(-0.2..0.2), r.gen_range(-0.3..0.3)];
        let y = [r.gen_range(0.8..1.4), r.gen_range(-0.2..0.2), r.gen_range(0.8..1.4)];
        siegel2(x, y)
    } else {
        let tau = c(r.gen_range(-0.5..0.5), r.gen_range(0.7..1.8));
        torus_from_tau(tau, r.gen_range(1..=3)).unwrap()
    }
}

fn random_vector(r: &mut ChaCha8Rng, rank: usize) -> Vec<i64> {
    loop {
        let v: Vec<i64> = (0..rank).map(|_| r.gen_range(-2..=2)).collect();
        if v.iter().any(|&x| x != 0) {
            return v;
        }
    }
}

/// Tracks every `(torus, k, R)` used for a series, for the tail audit.
#[derive(Default)]
struct Radii(Vec<(PolarizedTorus, u32, f64)>);

impl Radii {
    fn note(&mut self, t: &PolarizedTorus, k: u32, r: f64) {
        let known = self.0.iter().any(|(u, j, s)| u.basis() == t.basis() && *j == k && *s == r);
        if !known {
            self.0.push((t.clone(), k, r));
        }
    }
}

fn criterion_1() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for eta in [0.5, 0.8, 1.0, 1.5, 2.0] {
        for alpha in [0.0, 0.1, 0.25, 0.5, 0.9] {
            for k in [1, 2, 3, 5] {
                for i in 0..7 {
                    let t = -1.0 + f64::from(i) / 3.0;
                    let p = CylinderParams::new(eta, alpha, k, t).unwrap();
                    let (a, b) = (rho_cyl_direct(&p), rho_cyl_poisson(&p));
                    worst = worst.max((a - b).abs() / b.abs());
                    count += 1;
                }
            }
        }
    }
    Outcome::new(count == 700 && worst < 1e-11, format!("{count} points, max relative error {worst:.3e}"))
}

fn criterion_2(radii: &mut Radii) -> Outcome {
    let mut r = rng(2);
    let random = random_chi(&mut r, 2);
    let cases = [
        ("tau=i d=1 chi0", c(0.0, 1.0), 1, Semicharacter::trivial(2)),
        ("tau=i d=1 random chi", c(0.0, 1.0), 1, random),
        ("tau=0.3+1.2i d=1 chi0", c(0.3, 1.2), 1, Semicharacter::trivial(2)),
        ("tau=i d=2 chi0", c(0.0, 1.0), 2, Semicharacter::trivial(2)),
    ];
    let mut worst = 0.0f64;
    let mut at = String::new();
    for (name, tau, d, chi) in &cases {
        let t = torus_from_tau(*tau, *d).unwrap();
        for k in 1..=3 {
            let oracle = match ThetaOracle::new(&t, chi, k) {
                Ok(o) => o,
                Err(e) => return Outcome::new(false, format!("{name}, k={k}: oracle failed: {e}")),
            };
            for _ in 0..50 {
                let x = random_point(&mut r, 2);
                let s = rho_diag(&t, chi, k, &t.point_from_coords(&x), 1e-12).unwrap();
                radii.note(&t, k, s.radius);
                let o = oracle.rho(&x);
                let rel = (s.value - o).abs() / o.abs();
                if rel > worst {
                    worst = rel;
                    at = format!("{name}, k={k}");
                }
            }
        }
    }
    Outcome::new(worst < 1e-7, format!("600 points, max relative error {worst:.3e} ({at})"))
}

fn criterion_3(radii: &mut Radii) -> Outcome {
    let t = sq1();
    let chi = Semicharacter::trivial(2);
    let s = rho_diag(&t, &chi, 1, &t.point_from_coords(&[0.5, 0.5]), 1e-12).unwrap();
    radii.note(&t, 1, s.radius);
    let o = ThetaOracle::new(&t, &chi, 1).unwrap().rho(&[0.5, 0.5]);
    let tol = 1e-9 / (2.0 * PI);
    Outcome::new(s.value.abs() < tol && o.abs() < tol, format!("series {:.3e}, oracle {:.3e}", s.value, o))
}

fn criterion_4() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, t, k) in [("SQ1", sq1(), 1), ("SQ1", sq1(), 3), ("D2", d2(), 1), ("D2", d2(), 2)] {
        match integral_check(&t, &Semicharacter::trivial(2), k, 128, Execution::default()) {
            Ok(r) => {
                let rel = (r.integral - r.expected as f64).abs() / r.expected as f64;
                pass &= rel < 5e-3;
                parts.push(format!("{name} k={k}: {:.6}/{}", r.integral, r.expected));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{name} k={k}: {e}"));
            }
        }
    }
    Outcome::new(pass, parts.join(", "))
}

fn criterion_5() -> Outcome {
    let mut r = rng(5);
    let (mut ode, mut disp, mut power, mut constant) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let sign = calibration_sign();
    for _ in 0..100 {
        let t = random_torus(&mut r);
        let rank = t.rank();
        let chi = random_chi(&mut r, rank);
        let k = r.gen_range(1..=4);
        let x = random_point(&mut r, rank);
        let v = random_vector(&mut r, rank);
        let p = t.point_from_coords(&x);

        let closed = hol_closed(&t, &chi, k, &p, &v);
        let integrated = hol_ode(&t, &chi, k, &p, &v, 2000).unwrap();
        ode = ode.max((closed.value - integrated.value).norm());

        let m = r.gen_range(2..=4);
        let mv: Vec<i64> = v.iter().map(|a| m * a).collect();
        let lhs = hol_closed(&t, &chi, k, &p, &mv).value;
        power = power.max((lhs - closed.value.powi(m as i32)).norm());
        let lhs = hol_ode(&t, &chi, k, &p, &mv, 2000).unwrap().value;
        power = power.max((lhs - integrated.value.powi(m as i32)).norm());

        let u = random_vector(&mut r, rank);
        let s = r.gen::<f64>();
        let qx: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + s * *b as f64).collect();
        let q = t.point_from_coords(&qx);
        let shift = -s * t.riemann_int(&v, &u) as f64 * f64::from(k) * sign;
        let a_p = hol_ode(&t, &chi, k, &p, &u, 2000).unwrap().alpha;
        let a_q = hol_ode(&t, &chi, k, &q, &u, 2000).unwrap().alpha;
        disp = disp.max(circ(a_q - a_p, shift));

        // a direction pairing trivially with v
        let w = (0..50).map(|_| random_vector(&mut r, rank)).find(|w| t.riemann_int(&v, w) == 0).unwrap_or_else(|| mv.clone());
        let a_p = hol_closed(&t, &chi, k, &p, &w).alpha;
        let a_q = hol_closed(&t, &chi, k, &q, &w).alpha;
        constant = constant.max(circ(a_p, a_q));
    }
    let pass = ode < 1e-8 && disp < 1e-9 && power < 1e-9 && constant < 1e-10;
    Outcome::new(
        pass,
        format!("100 instances, closed vs ODE {ode:.2e}, displacement {disp:.2e}, power {power:.2e}, constancy {constant:.2e}"),
    )
}

fn criterion_6(radii: &mut Radii) -> Outcome {
    let chi = Semicharacter::trivial(2);
    let t = sq1();
    let report = find_extrema(&t, &chi, 1, 32, 200).unwrap();
    let max_ok = !report.maxima.is_empty() && report.maxima.iter().all(|m| m.location.coords.iter().all(|&x| circ(x, 0.0) < 1e-6));
    let min_ok = !report.minima.is_empty() && report.minima.iter().all(|m| m.location.coords.iter().all(|&x| circ(x, 0.5) < 1e-6));

    let ks: Vec<u32> = (2..=10).collect();
    for &k in &ks {
        radii.note(&t, k, KernelSeries::new(&t, &chi, k, 1e-12).unwrap().radius());
    }
    let rows = localization_sweep(&t, &chi, &ks).unwrap();
    let worst_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);

    let t2 = d2();
    let d2_report = find_extrema(&t2, &chi, 1, 32, 200).unwrap();
    let target = HolonomyTarget::uniform(vec![vec![1, 0], vec![0, 1]], Complex64::new(1.0, 0.0), 1).unwrap();
    let sols = solve_holonomy(&t2, &chi, &target).unwrap();
    let gap = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| circ(*x, *y)).fold(0.0, f64::max);
    let nearest = |a: &[f64], set: &mut dyn Iterator<Item = Vec<f64>>| set.map(|b| gap(a, &b)).fold(f64::INFINITY, f64::min);
    let forward =
        d2_report.maxima.iter().map(|m| nearest(&m.location.coords, &mut sols.points.iter().map(|p| p.coords.clone()))).fold(0.0, f64::max);
    let backward =
        sols.points.iter().map(|p| nearest(&p.coords, &mut d2_report.maxima.iter().map(|m| m.location.coords.clone()))).fold(0.0, f64::max);
    let d2_gap = forward.max(backward);

    let pass = max_ok && min_ok && worst_ratio <= 10.0 && d2_gap < 1e-8;
    Outcome::new(
        pass,
        format!(
            "SQ1 max {} min {}, localization ratio {worst_ratio:.3e} over k=2..10, D2 {} maxima vs {} holonomy points, gap {d2_gap:.2e}",
            if max_ok { "ok" } else { "off" },
            if min_ok { "ok" } else { "off" },
            d2_report.maxima.len(),
            sols.points.len()
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut r = rng(7);
    let chi = Semicharacter::trivial(2);
    let mut violations = 0;
    let mut pairs = 0;
    let mut slack = f64::INFINITY;
    for t in [sq1(), d2()] {
        for k in 1..=2 {
            let oracle = ThetaOracle::new(&t, &chi, k).unwrap();
            for _ in 0..100 {
                let x = random_point(&mut r, 2);
                let y = random_point(&mut r, 2);
                let b = offdiag_bound(&t, k, &t.point_from_coords(&x), &t.point_from_coords(&y), 1e-12).unwrap();
                let allowed = b.value + b.enclosure(bergman_core::kernel::prefactor(1, k));
                let o = oracle.offdiag(&x, &y);
                if o > allowed {
                    violations += 1;
                }
                slack = slack.min(allowed - o);
                pairs += 1;
            }
        }
    }
    Outcome::new(violations == 0, format!("{pairs} pairs, {violations} violations, min slack {slack:.3e}"))
}

fn criterion_8() -> Outcome {
    let t = sq1();
    let chi0 = Semicharacter::trivial(2);
    let shifted = Semicharacter::new(vec![0.3, 0.0]);
    let half = Semicharacter::new(vec![0.5, 0.0]);
    let distinct = compare_bundles(&t, &chi0, &shifted, 1, 32, Execution::default()).unwrap();
    let witness = 2.0 * PI * distinct.max_diff;
    let distinct_ok = distinct.verdict == Verdict::Distinct && witness >= 0.05;
    let iso = compare_bundles(&t, &chi0, &half, 2, 32, Execution::default()).unwrap();
    let iso_ok = iso.verdict == Verdict::IsomorphicPower;

    let origin = [0.0, 0.0];
    let mut phase_gap = 0.0f64;
    for chi in [&chi0, &shifted] {
        for v in [[1, 0], [0, 1]] {
            let fit = pushforward_fit(&t, chi, 1, &v, 256, &origin, Execution::default()).unwrap();
            let hol = hol_closed(&t, chi, 1, &t.point_from_coords(&origin), &v).alpha;
            phase_gap = phase_gap.max(circ(fit.phase, hol));
        }
    }
    let pass = distinct_ok && iso_ok && phase_gap < 1e-6;
    Outcome::new(
        pass,
        format!("witness 2pi|drho| = {witness:.4}, half-phase verdict {:?}, push-forward phase error {phase_gap:.2e}", iso.verdict),
    )
}

fn criterion_9(radii: &Radii) -> Outcome {
    let mut tail_ok = true;
    let mut checked = 0;
    for (t, k, radius) in &radii.0 {
        let kf = f64::from(*k);
        let brute: f64 = t
            .enumerate_within(radius + 10.0)
            .unwrap()
            .iter()
            .filter(|v| v.length > *radius)
            .map(|v| (-(kf / 4.0) * v.length * v.length).exp())
            .sum();
        tail_ok &= brute <= tail_bound(t, *radius, *k);
        checked += 1;
    }

    let mut r = rng(9);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let t = if r.gen_bool(0.5) { sq1() } else { torus_from_tau(c(0.3, 1.2), 1).unwrap() };
        let chi = random_chi(&mut r, 2);
        let k = r.gen_range(1..=3);
        let s = KernelSeries::new(&t, &chi, k, 1e-12).unwrap();
        let x = random_point(&mut r, 2);
        let g = s.gradient(&x);
        let h = 1e-5;
        let fd: Vec<f64> = (0..2)
            .map(|i| {
                let mut a = x.clone();
                let mut b = x.clone();
                a[i] += h;
                b[i] -= h;
                (s.value(&a) - s.value(&b)) / (2.0 * h)
            })
            .collect();
        let err = fd.iter().zip(&g).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        worst = worst.max(err / norm);
    }
    Outcome::new(
        tail_ok && checked > 0 && worst < 1e-6,
        format!(
            "{checked} series radii audited ({}), gradient relative error {worst:.2e}",
            if tail_ok { "all dominated" } else { "violated" }
        ),
    )
}

fn main() {
    let mut radii = Radii::default();
    let mut failures = 0;
    let mut report = |n: usize, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let took: Duration = start.elapsed();
        println!("criterion {n}: {} ({:.2} s) {}", if o.pass { "PASS" } else { "FAIL" }, took.as_secs_f64(), o.detail);
        if !o.pass {
            failures += 1;
        }
    };
    report(1, &mut criterion_1);
    report(2, &mut || criterion_2(&mut radii));
    report(3, &mut || criterion_3(&mut radii));
    report(4, &mut criterion_4);
    report(5, &mut criterion_5);
    report(6, &mut || criterion_6(&mut radii));
    report(7, &mut criterion_7);
    report(8, &mut criterion_8);
    report(9, &mut || criterion_9(&radii));
    if failures > 0 {
        println!("acceptance: {failures} criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: all 9 criteria passed");
}
