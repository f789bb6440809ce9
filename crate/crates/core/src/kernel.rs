//! Diagonal Bergman density as a lattice sum over geodesic loops,
//!
//! `ρ_k(p) = (k/2π)^n (1 + Σ_{v≠0} exp(-(k/4) ℓ(v)^2) cos(2π k α_v(p)))`,
//!
//! truncated at a radius chosen from a rigorous packing-bound tail estimate.
//! Also: grid sampling, the volume integral check and the off-diagonal
//! geodesic-segment bound.

use std::f64::consts::PI;
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::exec::{map_range, Execution};
use crate::holonomy;
use crate::lattice::{PolarizedTorus, Semicharacter, TorusPoint, DEFAULT_MAX_TERMS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesResult {
    pub value: f64,
    /// Truncation radius.
    pub radius: f64,
    /// Bound on the absolute sum of omitted terms, before the `(k/2π)^n`
    /// prefactor.
    pub tail: f64,
    /// Number of lattice vectors summed.
    pub terms: usize,
}

impl SeriesResult {
    /// Half-width of the certified enclosure around `value`.
    pub fn enclosure(&self, prefactor: f64) -> f64 {
        self.tail * prefactor
    }
}

pub fn prefactor(n: usize, k: u32) -> f64 {
    (f64::from(k) / (2.0 * PI)).powi(n as i32)
}

/// Upper bound on `Σ_{ℓ(v) > R} exp(-(k/4) ℓ(v)^2)`, valid for the lattice
/// and every translate of it.
///
/// Summed over unit-width shells: `Σ_j g(R + j)` with
/// `g(x) = sup_{y >= x} exp(-(k/4) y^2) (1 + 2(y + 1)/l1)^{2n}`, the second
/// factor being the packing bound on the number of points within `y + 1`.
/// The envelope makes the bound non-increasing in both `R` and `k`; it only
/// differs from the plain shell sum when `R` sits below the peak of that
/// log-concave summand.
pub fn tail_bound(torus: &PolarizedTorus, radius: f64, k: u32) -> f64 {
    let l1 = torus.shells().l1;
    let dim = torus.rank() as f64;
    let kf = f64::from(k);
    let n = torus.n() as f64;
    let summand = |y: f64| (-(kf / 4.0) * y * y + dim * (1.0 + 2.0 * (y + 1.0) / l1).ln()).exp();
    let b = kf * (l1 + 2.0);
    let peak = (-b + (b * b + 64.0 * n * kf).sqrt()) / (4.0 * kf);
    let mut total = 0.0;
    for j in 0.. {
        let x = radius.max(0.0) + j as f64;
        let term = summand(x.max(peak));
        total += term;
        if term < 1e-300 || (x > peak && term <= total * 1e-18) {
            break;
        }
    }
    total
}

/// Smallest radius `R >= l1` (to 1e-9 relative) with `tail_bound(R, k) <= eps`.
pub fn choose_radius(torus: &PolarizedTorus, k: u32, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be > 0, got {eps}")));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    let l1 = torus.shells().l1;
    if tail_bound(torus, l1, k) <= eps {
        return Ok(l1);
    }
    let mut lo = l1;
    let mut hi = 2.0 * l1;
    while tail_bound(torus, hi, k) > eps {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 * l1 {
            return Err(Error::InvalidArgument(format!("eps {eps} is unreachable")));
        }
    }
    while hi - lo > 1e-9 * hi {
        let mid = 0.5 * (lo + hi);
        if tail_bound(torus, mid, k) <= eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone)]
struct LoopTerm {
    /// `2 exp(-(k/4) ℓ(v)^2)`: `v` and `-v` contribute equal cosines.
    weight: f64,
    /// `-k arg χ(v) / 2π` in turns.
    base: f64,
    /// `k s E(v, λ_i)`: turns per unit of the i-th coordinate.
    slope: Vec<f64>,
}

/// The truncated loop series, prepared once for a fixed `(torus, χ, k, R)`
/// and evaluated at many points.
#[derive(Debug, Clone)]
pub struct KernelSeries {
    n: usize,
    prefactor: f64,
    radius: f64,
    tail: f64,
    terms: Vec<LoopTerm>,
    term_count: usize,
}

impl KernelSeries {
    pub fn new(torus: &PolarizedTorus, chi: &Semicharacter, k: u32, eps: f64) -> Result<Self> {
        let radius = choose_radius(torus, k, eps)?;
        Self::with_radius(torus, chi, k, radius)
    }

    pub fn with_radius(torus: &PolarizedTorus, chi: &Semicharacter, k: u32, radius: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be >= 1".into()));
        }
        if chi.phases.len() != torus.rank() {
            return Err(Error::Shape(format!("semicharacter needs {} phases", torus.rank())));
        }
        let vectors = torus.enumerate_within_capped(radius, DEFAULT_MAX_TERMS)?;
        let kf = f64::from(k);
        let sign = holonomy::calibration_sign();
        let terms: Vec<LoopTerm> = vectors
            .iter()
            .filter(|v| v.coords.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0))
            .map(|v| LoopTerm {
                weight: 2.0 * (-(kf / 4.0) * v.length * v.length).exp(),
                base: -kf * chi.turns(torus, &v.coords),
                slope: torus.riemann_row(&v.coords).iter().map(|&e| kf * sign * e as f64).collect(),
            })
            .collect();
        Ok(KernelSeries {
            n: torus.n(),
            prefactor: prefactor(torus.n(), k),
            radius,
            tail: tail_bound(torus, radius, k),
            terms,
            term_count: vectors.len(),
        })
    }

    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn phase(term: &LoopTerm, coords: &[f64]) -> f64 {
        let t: f64 = term.base + term.slope.iter().zip(coords).map(|(s, x)| s * x).sum::<f64>();
        2.0 * PI * (t - t.floor())
    }

    /// Density at the point with lattice coordinates `coords`.
    pub fn value(&self, coords: &[f64]) -> f64 {
        let s: f64 = self.terms.iter().map(|t| t.weight * Self::phase(t, coords).cos()).sum();
        self.prefactor * (1.0 + s)
    }

    pub fn eval(&self, coords: &[f64]) -> SeriesResult {
        SeriesResult { value: self.value(coords), radius: self.radius, tail: self.tail, terms: self.term_count }
    }

    /// Gradient of the truncated series with respect to lattice coordinates.
    pub fn gradient(&self, coords: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; coords.len()];
        for t in &self.terms {
            let s = -t.weight * Self::phase(t, coords).sin() * 2.0 * PI;
            for (gi, sl) in g.iter_mut().zip(&t.slope) {
                *gi += s * sl;
            }
        }
        g.iter_mut().for_each(|x| *x *= self.prefactor);
        g
    }

    pub fn hessian(&self, coords: &[f64]) -> Vec<Vec<f64>> {
        let d = coords.len();
        let mut h = vec![vec![0.0; d]; d];
        for t in &self.terms {
            let c = -t.weight * Self::phase(t, coords).cos() * 4.0 * PI * PI * self.prefactor;
            for i in 0..d {
                for j in 0..d {
                    h[i][j] += c * t.slope[i] * t.slope[j];
                }
            }
        }
        h
    }
}

/// `ρ_k(p)` with the truncation radius chosen so that the tail is at most `eps`.
pub fn rho_diag(torus: &PolarizedTorus, chi: &Semicharacter, k: u32, p: &TorusPoint, eps: f64) -> Result<SeriesResult> {
    Ok(KernelSeries::new(torus, chi, k, eps)?.eval(&p.coords))
}

/// Density sampled on the lattice-coordinate grid `(i_1/res, …, i_2n/res)`,
/// row-major with the first coordinate varying slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub rank: usize,
    pub res: usize,
    pub values: Vec<f64>,
    pub radius: f64,
    pub tail: f64,
    pub min_index: usize,
    pub max_index: usize,
}

impl GridField {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn coords(&self, index: usize) -> Vec<f64> {
        grid_coords(self.rank, self.res, index)
    }

    pub fn min(&self) -> (Vec<f64>, f64) {
        (self.coords(self.min_index), self.values[self.min_index])
    }

    pub fn max(&self) -> (Vec<f64>, f64) {
        (self.coords(self.max_index), self.values[self.max_index])
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// CSV with header `coord_1,…,coord_2n,rho,tail`; 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let header: Vec<String> = (1..=self.rank).map(|i| format!("coord_{i}")).chain(["rho".into(), "tail".into()]).collect();
        writeln!(w, "{}", header.join(","))?;
        for (i, v) in self.values.iter().enumerate() {
            let mut fields: Vec<String> = self.coords(i).iter().map(|x| fmt17(*x)).collect();
            fields.push(fmt17(*v));
            fields.push(fmt17(self.tail));
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    }
}

/// Fixed float format used by every CSV artifact.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn grid_coords(rank: usize, res: usize, mut index: usize) -> Vec<f64> {
    let mut c = vec![0.0; rank];
    for d in (0..rank).rev() {
        c[d] = (index % res) as f64 / res as f64;
        index /= res;
    }
    c
}

pub fn rho_grid(torus: &PolarizedTorus, chi: &Semicharacter, k: u32, res: usize, eps: f64, exec: Execution) -> Result<GridField> {
    let series = KernelSeries::new(torus, chi, k, eps)?;
    grid_from_series(&series, torus.rank(), res, exec)
}

pub fn grid_from_series(series: &KernelSeries, rank: usize, res: usize, exec: Execution) -> Result<GridField> {
    if res < 2 {
        return Err(Error::InvalidArgument(format!("res must be >= 2, got {res}")));
    }
    let total = res.checked_pow(rank as u32).ok_or_else(|| Error::InvalidArgument("grid too large".into()))?;
    let values = map_range(exec, total, |i| series.value(&grid_coords(rank, res, i)));
    let min_index = (0..total).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    let max_index = (0..total).max_by(|&a, &b| values[a].total_cmp(&values[b]).then(b.cmp(&a))).unwrap_or(0);
    Ok(GridField { rank, res, values, radius: series.radius(), tail: series.tail(), min_index, max_index })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralCheck {
    pub integral: f64,
    pub expected: u64,
    pub volume: f64,
    pub res: usize,
}

/// Riemann sum of `ρ_k` over the torus at `res` and `2 res`, compared with
/// `dim H^0(L^k) = k^n |Pf(E)|`.
pub fn integral_check(torus: &PolarizedTorus, chi: &Semicharacter, k: u32, res: usize, exec: Execution) -> Result<IntegralCheck> {
    if res < 8 {
        return Err(Error::InvalidArgument(format!("res must be >= 8, got {res}")));
    }
    let pf = torus.report().pfaffian_abs.ok_or(Error::DegenerateBasis)?;
    let expected = u64::from(k).pow(torus.n() as u32) * pf;
    let series = KernelSeries::new(torus, chi, k, 1e-12)?;
    let volume = torus.volume();
    let coarse = grid_from_series(&series, torus.rank(), res, exec)?.mean() * volume;
    let fine = grid_from_series(&series, torus.rank(), 2 * res, exec)?.mean() * volume;
    if (coarse - fine).abs() > 1e-3 * expected as f64 {
        return Err(Error::QuadratureUnconverged { res, coarse, fine_res: 2 * res, fine });
    }
    Ok(IntegralCheck { integral: coarse, expected, volume, res })
}

/// `(k/2π)^n Σ_γ exp(-(k/4) ℓ(γ)^2)` over geodesic segments from `y` to `x`,
/// i.e. over lattice translates of `x̃ - ỹ`.
pub fn offdiag_bound(torus: &PolarizedTorus, k: u32, x: &TorusPoint, y: &TorusPoint, eps: f64) -> Result<SeriesResult> {
    let radius = choose_radius(torus, k, eps)?;
    let center: Vec<f64> = x.coords.iter().zip(&y.coords).map(|(a, b)| a - b).collect();
    let shifted = torus.enumerate_shifted(&center, radius, DEFAULT_MAX_TERMS)?;
    let kf = f64::from(k);
    let sum: f64 = shifted.iter().map(|s| (-(kf / 4.0) * s.length * s.length).exp()).sum();
    Ok(SeriesResult { value: prefactor(torus.n(), k) * sum, radius, tail: tail_bound(torus, radius, k), terms: shifted.len() })
}
