mod common;

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use bergman_core::cylinder::{rho_cyl_direct, rho_cyl_poisson, CylinderParams};
use bergman_core::extrema::{distance_to_holonomy_set, solve_holonomy, HolonomySystem, HolonomyTarget};
use bergman_core::holonomy::{hol_closed, hol_ode};
use bergman_core::kernel::{prefactor, rho_grid, KernelSeries};
use bergman_core::theta::torus_from_tau;
use bergman_core::{Execution, PolarizedTorus, Semicharacter};
use common::{c, circ, siegel2};

fn torus1() -> impl Strategy<Value = PolarizedTorus> {
    (-0.5f64..0.5, 0.7f64..1.8, 1u32..=3).prop_map(|(re, im, d)| torus_from_tau(c(re, im), d).unwrap())
}

fn torus2() -> impl Strategy<Value = PolarizedTorus> {
    (-0.3f64..0.3, -0.2f64..0.2, -0.3f64..0.3, 0.8f64..1.4, -0.2f64..0.2, 0.8f64..1.4)
        .prop_map(|(x0, x1, x2, y0, y1, y2)| siegel2([x0, x1, x2], [y0, y1, y2]))
}

fn any_torus() -> impl Strategy<Value = PolarizedTorus> {
    prop_oneof![3 => torus1(), 1 => torus2()]
}

fn phases(rank: usize) -> impl Strategy<Value = Semicharacter> {
    proptest::collection::vec(0.0f64..1.0, rank).prop_map(Semicharacter::new)
}

fn small_vec(rank: usize) -> impl Strategy<Value = Vec<i64>> {
    proptest::collection::vec(-2i64..=2, rank)
}

fn unit_point(rank: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.0f64..1.0, rank)
}

fn with_data() -> impl Strategy<Value = (PolarizedTorus, Semicharacter, Vec<f64>, Vec<i64>, u32)> {
    any_torus().prop_flat_map(|t| {
        let r = t.rank();
        (Just(t), phases(r), unit_point(r), small_vec(r), 1u32..=4)
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn enumeration_matches_box_search(t in torus1(), radius in 1.0f64..6.0) {
        let listed: Vec<Vec<i64>> = t.enumerate_within(radius).unwrap().into_iter().map(|v| v.coords).collect();
        // a box that surely contains the ball: |x_i| <= R / sqrt(min eigenvalue of G)
        let g = t.gram();
        let min_eig = g.clone().symmetric_eigen().eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        let b = (radius / min_eig.sqrt()).ceil() as i64 + 1;
        let mut brute = Vec::new();
        for m in -b..=b {
            for n in -b..=b {
                if (m, n) != (0, 0) && t.length(&t.embed(&[m, n])) <= radius {
                    brute.push(vec![m, n]);
                }
            }
        }
        let mut sorted = listed.clone();
        sorted.sort();
        brute.sort();
        prop_assert_eq!(sorted, brute);
        for w in listed.windows(2) {
            let (a, b) = (t.length(&t.embed(&w[0])), t.length(&t.embed(&w[1])));
            prop_assert!(a <= b + 1e-12 * b);
        }
    }

    #[test]
    fn semicharacter_cocycle((t, chi, _, u, _) in with_data(), w in small_vec(4)) {
        let w: Vec<i64> = w.into_iter().take(t.rank()).collect();
        prop_assume!(w.len() == u.len());
        let sum: Vec<i64> = u.iter().zip(&w).map(|(a, b)| a + b).collect();
        let lhs = chi.eval(&t, &sum);
        let rhs = chi.eval(&t, &u) * chi.eval(&t, &w) * Complex64::from_polar(1.0, PI * t.riemann_int(&u, &w) as f64);
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn length_is_homogeneous((t, _, _, v, _) in with_data(), m in -5i64..=5) {
        let mv: Vec<i64> = v.iter().map(|x| m * x).collect();
        let a = t.length(&t.embed(&mv));
        let b = m.unsigned_abs() as f64 * t.length(&t.embed(&v));
        prop_assert!((a - b).abs() < 1e-12 * b.max(1.0));
    }

    #[test]
    fn ode_agrees_with_closed_form((t, chi, x, v, k) in with_data()) {
        let p = t.point_from_coords(&x);
        let a = hol_closed(&t, &chi, k, &p, &v);
        let b = hol_ode(&t, &chi, k, &p, &v, 2000).unwrap();
        prop_assert!((a.value - b.value).norm() < 1e-8, "{:?} vs {:?}", a, b);
    }

    #[test]
    fn power_law((t, chi, x, v, k) in with_data(), m in 1i64..=4) {
        let p = t.point_from_coords(&x);
        let mv: Vec<i64> = v.iter().map(|c| m * c).collect();
        let single = hol_closed(&t, &chi, k, &p, &v).value;
        let multi = hol_closed(&t, &chi, k, &p, &mv).value;
        prop_assert!((multi - single.powi(m as i32)).norm() < 1e-9);
        let single_ode = hol_ode(&t, &chi, k, &p, &v, 2000).unwrap().value;
        let multi_ode = hol_ode(&t, &chi, k, &p, &mv, 4000).unwrap().value;
        prop_assert!((multi_ode - single_ode.powi(m as i32)).norm() < 1e-8);
    }

    #[test]
    fn displacement_law((t, chi, x, v, k) in with_data(), u in small_vec(4), s in 0.0f64..1.0) {
        let u: Vec<i64> = u.into_iter().take(t.rank()).collect();
        prop_assume!(u.len() == v.len());
        let lv = t.length(&t.embed(&v));
        prop_assume!(lv > 0.0);
        let p = t.point_from_coords(&x);
        let qx: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + s * *b as f64).collect();
        let q = t.point_from_coords(&qx);
        let d = s * lv;
        let sign = bergman_core::holonomy::calibration_sign();
        let predicted = -(d / lv) * t.riemann_int(&v, &u) as f64 * f64::from(k) * sign;
        let a_p = hol_ode(&t, &chi, k, &p, &u, 2000).unwrap().alpha;
        let a_q = hol_ode(&t, &chi, k, &q, &u, 2000).unwrap().alpha;
        prop_assert!(circ(a_q - a_p, predicted) < 1e-9);
        if t.riemann_int(&v, &u) == 0 {
            prop_assert!(circ(a_q, a_p) < 1e-10);
        }
    }

    #[test]
    fn lift_independence((t, chi, x, v, k) in with_data(), shift in small_vec(4)) {
        let shift: Vec<i64> = shift.into_iter().take(t.rank()).collect();
        prop_assume!(shift.len() == x.len());
        let y: Vec<f64> = x.iter().zip(&shift).map(|(a, b)| a + *b as f64).collect();
        let a = hol_closed(&t, &chi, k, &t.point_from_coords(&x), &v).value;
        let b = hol_closed(&t, &chi, k, &t.point_from_coords(&y), &v).value;
        prop_assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn density_is_nonnegative_up_to_tail(t in torus1(), chi in phases(2), x in unit_point(2), k in 1u32..=3) {
        let s = KernelSeries::new(&t, &chi, k, 1e-12).unwrap();
        prop_assert!(s.value(&x) >= -s.tail() * s.prefactor());
    }

    #[test]
    fn density_is_lattice_periodic(t in torus1(), chi in phases(2), x in unit_point(2), shift in small_vec(2), k in 1u32..=3) {
        let s = KernelSeries::new(&t, &chi, k, 1e-12).unwrap();
        let y: Vec<f64> = x.iter().zip(&shift).map(|(a, b)| a + *b as f64).collect();
        prop_assert!((s.value(&x) - s.value(&y)).abs() < 1e-12 * s.prefactor());
    }

    #[test]
    fn gradient_matches_finite_differences((t, chi, x, _, k) in with_data()) {
        let s = KernelSeries::new(&t, &chi, k, 1e-12).unwrap();
        let g = s.gradient(&x);
        let scale = g.iter().map(|v| v.abs()).fold(s.prefactor() * 1e-3, f64::max);
        let h = 1e-5;
        for i in 0..x.len() {
            let mut a = x.clone();
            let mut b = x.clone();
            a[i] += h;
            b[i] -= h;
            let fd = (s.value(&a) - s.value(&b)) / (2.0 * h);
            prop_assert!((fd - g[i]).abs() < 1e-6 * scale, "i = {}: {} vs {}", i, fd, g[i]);
        }
    }

    #[test]
    fn cylinder_poisson_identity(eta in 0.4f64..2.5, alpha in 0.0f64..1.0, k in 1u32..=6, t in -1.5f64..1.5) {
        let p = CylinderParams::new(eta, alpha, k, t).unwrap();
        let (a, b) = (rho_cyl_direct(&p), rho_cyl_poisson(&p));
        prop_assert!(a > 0.0);
        prop_assert!((a - b).abs() < 1e-11 * a);
    }

    #[test]
    fn holonomy_solutions_hit_targets(t in torus1(), chi in phases(2), k in 1u32..=3, args in proptest::collection::vec(0.0f64..1.0, 2)) {
        let targets = args.iter().map(|a| Complex64::from_polar(1.0, 2.0 * PI * a)).collect();
        let target = HolonomyTarget::new(vec![vec![1, 0], vec![0, 1]], targets, k).unwrap();
        let sols = solve_holonomy(&t, &chi, &target).unwrap();
        let det = (k as usize).pow(2) * (t.report().pfaffian_abs.unwrap() as usize).pow(2);
        prop_assert_eq!(sols.points.len(), det);
        let system = HolonomySystem::new(&t, &chi, &target).unwrap();
        for p in &sols.points {
            let (d, _) = distance_to_holonomy_set(&t, &system, &p.coords);
            prop_assert!(d < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn grid_is_schedule_independent(t in torus1(), chi in phases(2), k in 1u32..=3) {
        let a = rho_grid(&t, &chi, k, 12, 1e-12, Execution::Parallel).unwrap();
        let b = rho_grid(&t, &chi, k, 12, 1e-12, Execution::Sequential).unwrap();
        prop_assert_eq!(a.values, b.values);
    }

    #[test]
    fn large_k_flattens(t in torus1(), chi in phases(2), x in unit_point(2)) {
        let k = 60;
        let s = KernelSeries::new(&t, &chi, k, 1e-12).unwrap();
        let l1 = t.shells().l1;
        let dev = (s.value(&x) / prefactor(1, k) - 1.0).abs();
        let bound = 2.0 * t.shells().s1.len() as f64 * (-(k as f64) / 4.0 * l1 * l1).exp() + s.tail();
        prop_assert!(dev <= bound);
    }
}
