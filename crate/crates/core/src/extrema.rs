//! Where `ρ_k` peaks and dips, and what the density remembers of the bundle.
//!
//! Extrema are compared with the points where the holonomies along the
//! shortest loops are all `1` (maxima) or all `-1` (minima). Those points
//! solve a linear congruence in lattice coordinates. The push-forward of
//! `ρ_k` along a loop direction recovers the holonomy phase of that loop.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::{map_range, Execution};
use crate::holonomy::{self, hol_closed};
use crate::intlin;
use crate::kernel::{grid_from_series, KernelSeries};
use crate::lattice::{fincke_pohst, PolarizedTorus, Semicharacter, TorusPoint};
use crate::optimize::{nelder_mead, newton_polish};

const SOLUTION_CAP: usize = 1_000_000;

fn frac(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r >= 1.0 - 1e-12 {
        0.0
    } else {
        r
    }
}

/// Lattice vectors with the holonomy each should have on `L^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct HolonomyTarget {
    pub vectors: Vec<Vec<i64>>,
    pub targets: Vec<Complex64>,
    pub k: u32,
}

impl HolonomyTarget {
    pub fn new(vectors: Vec<Vec<i64>>, targets: Vec<Complex64>, k: u32) -> Result<Self> {
        if vectors.len() != targets.len() {
            return Err(Error::Shape(format!("{} vectors but {} targets", vectors.len(), targets.len())));
        }
        if k == 0 {
            return Err(Error::InvalidArgument("k must be >= 1".into()));
        }
        if let Some(t) = targets.iter().find(|t| (t.norm() - 1.0).abs() > 1e-9) {
            return Err(Error::InvalidArgument(format!("target {t} is not of modulus 1")));
        }
        Ok(HolonomyTarget { vectors, targets, k })
    }

    /// Every vector gets the same target.
    pub fn uniform(vectors: Vec<Vec<i64>>, target: Complex64, k: u32) -> Result<Self> {
        let targets = vec![target; vectors.len()];
        Self::new(vectors, targets, k)
    }

    /// Independent half of `S1` with every holonomy equal to `target`.
    pub fn on_s1(torus: &PolarizedTorus, target: Complex64, k: u32) -> Result<Self> {
        let vectors = torus.s1_independent().into_iter().map(|v| v.coords).collect();
        Self::uniform(vectors, target, k)
    }
}

/// The congruence `M x ≡ b (mod 1)` in lattice coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct HolonomySystem {
    pub matrix: Vec<Vec<i64>>,
    pub rhs: Vec<f64>,
}

impl HolonomySystem {
    pub fn new(torus: &PolarizedTorus, chi: &Semicharacter, target: &HolonomyTarget) -> Result<Self> {
        let rank = torus.rank();
        if chi.phases.len() != rank {
            return Err(Error::Shape(format!("semicharacter needs {rank} phases")));
        }
        if target.vectors.iter().any(|v| v.len() != rank) {
            return Err(Error::Shape(format!("target vectors need {rank} coordinates")));
        }
        if !target.vectors.is_empty() && intlin::rank(&target.vectors) < target.vectors.len() {
            return Err(Error::DependentVectors);
        }
        let sign = holonomy::calibration().sign as i64;
        let k = i64::from(target.k);
        let matrix = target.vectors.iter().map(|v| torus.riemann_row(v).into_iter().map(|e| k * sign * e).collect()).collect();
        let rhs = target
            .vectors
            .iter()
            .zip(&target.targets)
            .map(|(v, t)| frac(t.arg() / (2.0 * PI) + f64::from(target.k) * chi.turns(torus, v)))
            .collect();
        Ok(HolonomySystem { matrix, rhs })
    }

    /// `M x - b`, not reduced.
    fn residual(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.iter().zip(&self.rhs).map(|(row, b)| row.iter().zip(x).map(|(&m, xi)| m as f64 * xi).sum::<f64>() - b).collect()
    }
}

/// Solutions of a holonomy congruence. When the vectors do not span, the
/// solution set has positive dimension and `points` holds representatives on
/// a mesh of the free directions.
#[derive(Debug, Clone, PartialEq)]
pub struct HolonomySolutions {
    pub points: Vec<TorusPoint>,
    pub family_dim: usize,
}

impl HolonomySolutions {
    pub fn is_family(&self) -> bool {
        self.family_dim > 0
    }
}

pub fn solve_holonomy(torus: &PolarizedTorus, chi: &Semicharacter, target: &HolonomyTarget) -> Result<HolonomySolutions> {
    solve_holonomy_mesh(torus, chi, target, 8)
}

/// As [`solve_holonomy`], with `mesh` samples per free direction.
pub fn solve_holonomy_mesh(torus: &PolarizedTorus, chi: &Semicharacter, target: &HolonomyTarget, mesh: usize) -> Result<HolonomySolutions> {
    let system = HolonomySystem::new(torus, chi, target)?;
    let dim = torus.rank();
    let m = system.matrix.len();
    let family_dim = dim - m;
    let mesh = mesh.max(1);

    // x = U y with T = M U = [T1 | 0], T1 lower triangular
    let (t, u) = if m == 0 {
        (Vec::new(), (0..dim).map(|i| (0..dim).map(|j| i128::from(i == j)).collect()).collect())
    } else {
        intlin::column_echelon(&system.matrix)
    };
    let diag: Vec<usize> = (0..m).map(|i| t[i][i] as usize).collect();
    if diag.contains(&0) {
        return Err(Error::InconsistentSystem);
    }
    let count = diag
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .and_then(|c| c.checked_mul(mesh.checked_pow(family_dim as u32)?))
        .filter(|&c| c <= SOLUTION_CAP)
        .ok_or_else(|| Error::InvalidArgument(format!("more than {SOLUTION_CAP} solution representatives")))?;

    let mut points = Vec::with_capacity(count);
    for index in 0..count {
        let mut rest = index;
        let mut y = vec![0.0; dim];
        for i in 0..m {
            let z = (rest % diag[i]) as f64;
            rest /= diag[i];
            let s: f64 = (0..i).map(|j| t[i][j] as f64 * y[j]).sum();
            y[i] = (system.rhs[i] + z - s) / t[i][i] as f64;
        }
        for yi in y.iter_mut().skip(m) {
            *yi = (rest % mesh) as f64 / mesh as f64;
            rest /= mesh;
        }
        let x: Vec<f64> = (0..dim).map(|r| frac((0..dim).map(|c| u[r][c] as f64 * y[c]).sum())).collect();
        points.push(torus.point_from_coords(&x));
    }
    points.sort_by(|a, b| {
        a.coords.iter().zip(&b.coords).map(|(p, q)| p.total_cmp(q)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });

    for p in &points {
        for (v, want) in target.vectors.iter().zip(&target.targets) {
            if (hol_closed(torus, chi, target.k, p, v).value - want).norm() > 1e-9 {
                return Err(Error::InconsistentSystem);
            }
        }
    }
    Ok(HolonomySolutions { points, family_dim })
}

/// Geodesic distance from `coords` to the solution set of the congruence,
/// and the nearest solution.
pub fn distance_to_holonomy_set(torus: &PolarizedTorus, system: &HolonomySystem, coords: &[f64]) -> (f64, Vec<f64>) {
    let m = system.matrix.len();
    if m == 0 {
        return (0.0, coords.to_vec());
    }
    let dim = torus.rank();
    let g = torus.gram();
    let ginv = g.clone().try_inverse().expect("Gram matrix is invertible");
    let mm = DMatrix::from_fn(m, dim, |i, j| system.matrix[i][j] as f64);
    let inner = &mm * &ginv * mm.transpose();
    let q = inner.try_inverse().expect("independent rows");
    let q = (&q + q.transpose()) * 0.5;
    let c: Vec<f64> = system.residual(coords).iter().map(|r| -r).collect();
    let quad = |z: &[i64]| -> f64 {
        let r = DVector::from_iterator(m, z.iter().zip(&c).map(|(&zi, ci)| zi as f64 + ci));
        (r.transpose() * &q * &r)[(0, 0)]
    };
    let z0: Vec<i64> = c.iter().map(|ci| (-ci).round() as i64).collect();
    let mut best = (quad(&z0), z0);
    let radius = best.0.max(0.0).sqrt();
    fincke_pohst(&q, &c, radius, &mut |z: &[i64]| {
        let v = quad(z);
        if v < best.0 {
            best = (v, z.to_vec());
        }
        true
    });
    let r = DVector::from_iterator(m, best.1.iter().zip(&c).map(|(&zi, ci)| zi as f64 + ci));
    let delta = &ginv * mm.transpose() * (&q * r);
    let nearest: Vec<f64> = coords.iter().zip(delta.iter()).map(|(x, d)| frac(x + d)).collect();
    (best.0.max(0.0).sqrt(), nearest)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Max,
    Min,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremumReport {
    pub kind: ExtremumKind,
    pub location: TorusPoint,
    pub value: f64,
    /// Half-width of the certified enclosure of `value`.
    pub enclosure: f64,
    /// Nearest point with the holonomy pattern predicted for this kind.
    pub predicted: TorusPoint,
    pub distance: f64,
    /// `exp((k/4)(l1^2 - l2^2))`.
    pub radius_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremaReport {
    pub k: u32,
    /// All global maxima, ordered lexicographically by coordinates.
    pub maxima: Vec<ExtremumReport>,
    pub minima: Vec<ExtremumReport>,
    /// Whether `S1 = {±v_1, …, ±v_m}` for an independent `v_1..v_m`, the
    /// setting in which minima are expected near holonomy `-1` points.
    pub s1_pairs_independent: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremaOptions {
    pub res: usize,
    pub refine_iters: usize,
    pub max_candidates: usize,
    pub exec: Execution,
}

impl Default for ExtremaOptions {
    fn default() -> Self {
        ExtremaOptions { res: 32, refine_iters: 200, max_candidates: 256, exec: Execution::default() }
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter().zip(b).map(|(p, q)| p.total_cmp(q)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
}

/// Grid indices that are at least as extreme as all `3^{2n} - 1` periodic
/// neighbours.
fn local_extrema(values: &[f64], rank: usize, res: usize, kind: ExtremumKind) -> Vec<usize> {
    let better = |a: f64, b: f64| match kind {
        ExtremumKind::Max => a > b,
        ExtremumKind::Min => a < b,
    };
    let offsets: Vec<Vec<i64>> = (0..3usize.pow(rank as u32))
        .map(|mut o| {
            (0..rank)
                .map(|_| {
                    let d = (o % 3) as i64 - 1;
                    o /= 3;
                    d
                })
                .collect()
        })
        .filter(|o: &Vec<i64>| o.iter().any(|&d| d != 0))
        .collect();
    let r = res as i64;
    (0..values.len())
        .filter(|&idx| {
            let mut digits = vec![0i64; rank];
            let mut rest = idx;
            for d in (0..rank).rev() {
                digits[d] = (rest % res) as i64;
                rest /= res;
            }
            offsets.iter().all(|o| {
                let nb = digits.iter().zip(o).fold(0usize, |acc, (&dg, &od)| acc * res + (dg + od).rem_euclid(r) as usize);
                !better(values[nb], values[idx])
            })
        })
        .collect()
}

fn refine(series: &KernelSeries, start: &[f64], kind: ExtremumKind, opts: &ExtremaOptions) -> Vec<f64> {
    let sgn = match kind {
        ExtremumKind::Max => -1.0,
        ExtremumKind::Min => 1.0,
    };
    let (x, _) = nelder_mead(|x| sgn * series.value(x), start, 0.5 / opts.res as f64, opts.refine_iters);
    let polished = newton_polish(|x| series.gradient(x), |x| series.hessian(x), &x, 30);
    // keep the polish only if it did not walk away from the extremum
    if sgn * series.value(&polished) <= sgn * series.value(&x) + 1e-14 * series.prefactor() {
        polished
    } else {
        x
    }
}

fn extrema_of_kind(
    torus: &PolarizedTorus,
    chi: &Semicharacter,
    k: u32,
    series: &KernelSeries,
    values: &[f64],
    kind: ExtremumKind,
    opts: &ExtremaOptions,
) -> Result<Vec<ExtremumReport>> {
    let rank = torus.rank();
    let mut cands = local_extrema(values, rank, opts.res, kind);
    match kind {
        ExtremumKind::Max => cands.sort_by(|&a, &b| values[b].total_cmp(&values[a])),
        ExtremumKind::Min => cands.sort_by(|&a, &b| values[a].total_cmp(&values[b])),
    }
    cands.truncate(opts.max_candidates.max(1));
    let starts: Vec<Vec<f64>> = cands.iter().map(|&i| crate::kernel::grid_coords(rank, opts.res, i)).collect();
    let refined: Vec<(Vec<f64>, f64)> = map_range(opts.exec, starts.len(), |i| {
        let x: Vec<f64> = refine(series, &starts[i], kind, opts).into_iter().map(frac).collect();
        let v = series.value(&x);
        (x, v)
    });
    let best = match kind {
        ExtremumKind::Max => refined.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max),
        ExtremumKind::Min => refined.iter().map(|r| r.1).fold(f64::INFINITY, f64::min),
    };
    let tol = 1e-9 * best.abs().max(1.0);
    let mut kept: Vec<(Vec<f64>, f64)> = Vec::new();
    for (x, v) in refined {
        if (v - best).abs() > tol {
            continue;
        }
        if kept.iter().any(|(y, _)| torus.distance(&x, y) < 1e-6) {
            continue;
        }
        kept.push((x, v));
    }
    kept.sort_by(|a, b| lex_cmp(&a.0, &b.0));

    let target = match kind {
        ExtremumKind::Max => Complex64::new(1.0, 0.0),
        ExtremumKind::Min => Complex64::new(-1.0, 0.0),
    };
    let system = HolonomySystem::new(torus, chi, &HolonomyTarget::on_s1(torus, target, k)?)?;
    let shells = torus.shells();
    let radius_bound = ((f64::from(k) / 4.0) * (shells.l1 * shells.l1 - shells.l2 * shells.l2)).exp();
    Ok(kept
        .into_iter()
        .map(|(x, value)| {
            let (distance, nearest) = distance_to_holonomy_set(torus, &system, &x);
            ExtremumReport {
                kind,
                location: torus.point_from_coords(&x),
                value,
                enclosure: series.tail() * series.prefactor(),
                predicted: torus.point_from_coords(&nearest),
                distance,
                radius_bound,
            }
        })
        .collect())
}

/// Global maxima and minima of `ρ_k`, located by a grid scan and refined,
/// with their distances to the holonomy `±1` points of `S1`.
pub fn find_extrema(torus: &PolarizedTorus, chi: &Semicharacter, k: u32, res: usize, refine_iters: usize) -> Result<ExtremaReport> {
    find_extrema_with(torus, chi, k, &ExtremaOptions { res, refine_iters, ..ExtremaOptions::default() })
}

pub fn find_extrema_with(torus: &PolarizedTorus, chi: &Semicharacter, k: u32, opts: &ExtremaOptions) -> Result<ExtremaReport> {
    if opts.res < 16 {
        return Err(Error::InvalidArgument(format!("res must be >= 16, got {}", opts.res)));
    }
    let series = KernelSeries::new(torus, chi, k, 1e-12)?;
    let grid = grid_from_series(&series, torus.rank(), opts.res, opts.exec)?;
    let maxima = extrema_of_kind(torus, chi, k, &series, &grid.values, ExtremumKind::Max, opts)?;
    let minima = extrema_of_kind(torus, chi, k, &series, &grid.values, ExtremumKind::Min, opts)?;
    let s1_pairs_independent = torus.shells().s1.len() == 2 * torus.s1_independent().len();
    Ok(ExtremaReport { k, maxima, minima, s1_pairs_independent })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizationRow {
    pub k: u32,
    /// Largest distance from a global maximum to the holonomy-one set.
    pub dist: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// Distances of the global maxima from their predicted locations for each
/// `k`, against `exp((k/4)(l1^2 - l2^2))`.
pub fn localization_sweep(torus: &PolarizedTorus, chi: &Semicharacter, ks: &[u32]) -> Result<Vec<LocalizationRow>> {
    localization_sweep_with(torus, chi, ks, Execution::default())
}

pub fn localization_sweep_with(torus: &PolarizedTorus, chi: &Semicharacter, ks: &[u32], exec: Execution) -> Result<Vec<LocalizationRow>> {
    ks.iter()
        .map(|&k| {
            let res = if torus.n() == 1 { (4 * k as usize).max(32) } else { 16 };
            let opts = ExtremaOptions { res, exec, ..ExtremaOptions::default() };
            let report = find_extrema_with(torus, chi, k, &opts)?;
            let dist = report.maxima.iter().map(|m| m.distance).fold(0.0, f64::max);
            let bound = report.maxima.first().map(|m| m.radius_bound).unwrap_or(f64::NAN);
            Ok(LocalizationRow { k, dist, bound, ratio: dist / bound })
        })
        .collect()
}

/// Outcome of recovering a loop holonomy from the push-forward of `ρ_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PushforwardFit {
    /// Recovered `k α_{v1}(p)` in turns, in `[0, 1)`.
    pub phase: f64,
    /// Integer frequency of the profile in the quotient coordinate.
    pub lambda: i64,
    pub amplitude: f64,
    /// `2 ν exp(-(k/4) ℓ(v1)^2)`.
    pub expected_amplitude: f64,
    /// Volume of a fiber.
    pub nu: f64,
    /// Largest deviation from the harmonic model, relative to `amplitude`.
    pub residual: f64,
    /// The closed-form holonomy phase at the basepoint, for comparison.
    pub closed_form_phase: f64,
}

pub fn pushforward_recover(torus: &PolarizedTorus, chi: &Semicharacter, k: u32, v1: &[i64], samples: usize) -> Result<f64> {
    let base = vec![0.0; torus.rank()];
    Ok(pushforward_fit(torus, chi, k, v1, samples, &base, Execution::default())?.phase)
}

/// Integrates `ρ_k` over the fibers `{E(v1, ·) = const}` at `samples`
/// values of the quotient coordinate and reads the holonomy phase of `v1`
/// at `basepoint` off the dominant Fourier mode.
pub fn pushforward_fit(
    torus: &PolarizedTorus,
    chi: &Semicharacter,
    k: u32,
    v1: &[i64],
    samples: usize,
    basepoint: &[f64],
    exec: Execution,
) -> Result<PushforwardFit> {
    let n = torus.n();
    let dim = torus.rank();
    if n > 2 {
        return Err(Error::InvalidArgument(format!("push-forward needs n <= 2, got n = {n}")));
    }
    if v1.len() != dim || basepoint.len() != dim {
        return Err(Error::Shape(format!("vector and basepoint need {dim} coordinates")));
    }
    if !intlin::is_primitive(v1) {
        return Err(Error::NotPrimitive(v1.to_vec()));
    }
    if samples < 16 {
        return Err(Error::InvalidArgument(format!("samples must be >= 16, got {samples}")));
    }
    let kf = f64::from(k);
    let row = torus.riemann_row(v1);
    let (t, u) = intlin::column_echelon(std::slice::from_ref(&row));
    let g = t[0][0] as i64;
    let shift: Vec<f64> = (0..dim).map(|r| u[r][0] as f64).collect();
    let kappa: Vec<Vec<i64>> = (1..dim).map(|c| (0..dim).map(|r| u[r][c] as i64).collect()).collect();

    let gram = torus.gram();
    let kmat = DMatrix::from_fn(dim, dim - 1, |r, c| kappa[c][r] as f64);
    let nu = (kmat.transpose() * gram * &kmat).determinant().sqrt();

    let sign = holonomy::calibration().sign as i64;
    let lambda = i64::from(k) * sign * g;
    let len = torus.length(&torus.embed(v1));
    let harmonic = |m: i64| 2.0 * nu * (-(kf / 4.0) * (m * m) as f64 * len * len).exp();
    let harmonics: Vec<i64> = (1..).take_while(|&m| harmonic(m) > 1e-17 * harmonic(1)).collect();
    let top = lambda.abs() * harmonics.last().copied().unwrap_or(1);
    if (samples as i64) <= 2 * top {
        return Err(Error::InvalidArgument(format!("samples must exceed {} to resolve the profile", 2 * top)));
    }

    // fiber resolution: above every transverse frequency of a non-negligible term
    let reach = (4.0 * 17.0 * std::f64::consts::LN_10 / kf).sqrt();
    let mut needed = 1i64;
    for v in torus.enumerate_within(reach)? {
        for kap in &kappa {
            needed = needed.max((kf as i64) * torus.riemann_int(&v.coords, kap).abs() + 1);
        }
    }
    let cap = if n == 1 { 512 } else { 16 };
    let per_axis = needed.min(cap) as usize;
    let fiber_points = per_axis.pow((dim - 1) as u32);

    let series = KernelSeries::new(torus, chi, k, 1e-14)?;
    let scale = (2.0 * PI / kf).powi(n as i32);
    let profile: Vec<f64> = map_range(exec, samples, |j| {
        let tt = j as f64 / samples as f64;
        let mut acc = 0.0;
        for f in 0..fiber_points {
            let mut rest = f;
            let mut x: Vec<f64> = basepoint.iter().zip(&shift).map(|(b, s)| b + tt * s).collect();
            for kap in &kappa {
                let s = (rest % per_axis) as f64 / per_axis as f64;
                rest /= per_axis;
                for (xi, &ki) in x.iter_mut().zip(kap) {
                    *xi += s * ki as f64;
                }
            }
            acc += scale * series.value(&x) - 1.0;
        }
        nu * acc / fiber_points as f64
    });

    let coeff = |freq: i64| -> Complex64 {
        profile
            .iter()
            .enumerate()
            .map(|(j, &f)| f * Complex64::from_polar(1.0, -2.0 * PI * (freq * j as i64) as f64 / samples as f64))
            .sum::<Complex64>()
            / samples as f64
    };
    let dominant = (1..=(samples / 2) as i64).max_by(|&a, &b| coeff(a).norm().total_cmp(&coeff(b).norm())).unwrap_or(1);
    if dominant != lambda.abs() {
        return Err(Error::FitResidualTooLarge { residual: f64::INFINITY });
    }
    let c = coeff(lambda);
    let amplitude = 2.0 * c.norm();
    let phase = frac(c.arg() / (2.0 * PI));

    let mut residual = 0.0f64;
    for (j, &f) in profile.iter().enumerate() {
        let tt = j as f64 / samples as f64;
        let model: f64 = harmonics
            .iter()
            .map(|&m| {
                let a = if m == 1 { amplitude } else { harmonic(m) };
                a * (2.0 * PI * m as f64 * (lambda as f64 * tt + phase)).cos()
            })
            .sum();
        residual = residual.max((f - model).abs());
    }
    let residual = residual / amplitude;
    if !(residual <= 1e-6) {
        return Err(Error::FitResidualTooLarge { residual });
    }
    let p = torus.point_from_coords(basepoint);
    Ok(PushforwardFit {
        phase,
        lambda,
        amplitude,
        expected_amplitude: harmonic(1),
        nu,
        residual,
        closed_form_phase: hol_closed(torus, chi, k, &p, v1).alpha,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    IsomorphicPower,
    Distinct,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BundleComparison {
    pub verdict: Verdict,
    /// `max |ρ_χ - ρ_χ'|` over the grid.
    pub max_diff: f64,
    /// Certified-tail threshold below which the densities count as equal.
    pub threshold: f64,
    /// Grid point realizing `max_diff` when the verdict is `Distinct`.
    pub witness: Option<Vec<f64>>,
    /// Recovered phases `(χ, χ')` per basis vector, when both were fitted.
    pub phases: Vec<(f64, f64)>,
}

fn circular_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Decides whether `L_χ^k` and `L_χ'^k` agree, from the densities alone.
pub fn compare_bundles(
    torus: &PolarizedTorus,
    chi: &Semicharacter,
    chi2: &Semicharacter,
    k: u32,
    res: usize,
    exec: Execution,
) -> Result<BundleComparison> {
    let rank = torus.rank();
    let s1 = KernelSeries::new(torus, chi, k, 1e-12)?;
    let s2 = KernelSeries::new(torus, chi2, k, 1e-12)?;
    let g1 = grid_from_series(&s1, rank, res, exec)?;
    let g2 = grid_from_series(&s2, rank, res, exec)?;
    let (argmax, max_diff) =
        g1.values
            .iter()
            .zip(&g2.values)
            .map(|(a, b)| (a - b).abs())
            .enumerate()
            .fold((0, 0.0f64), |acc, (i, d)| if d > acc.1 { (i, d) } else { acc });
    let pre = s1.prefactor();
    let threshold = (s1.tail() + s2.tail()) * pre + 1e-12 * pre;
    if max_diff > threshold {
        return Ok(BundleComparison {
            verdict: Verdict::Distinct,
            max_diff,
            threshold,
            witness: Some(g1.coords(argmax)),
            phases: Vec::new(),
        });
    }
    if torus.n() > 2 {
        return Ok(BundleComparison { verdict: Verdict::IsomorphicPower, max_diff, threshold, witness: None, phases: Vec::new() });
    }
    let base = vec![0.0; rank];
    let mut phases = Vec::with_capacity(rank);
    let mut agree = true;
    for i in 0..rank {
        let v: Vec<i64> = (0..rank).map(|j| i64::from(i == j)).collect();
        let a = pushforward_fit(torus, chi, k, &v, 256, &base, exec)?.phase;
        let b = pushforward_fit(torus, chi2, k, &v, 256, &base, exec)?.phase;
        agree &= circular_gap(a, b) < 1e-6;
        phases.push((a, b));
    }
    let verdict = if agree { Verdict::IsomorphicPower } else { Verdict::Distinct };
    Ok(BundleComparison { verdict, max_diff, threshold, witness: None, phases })
}
