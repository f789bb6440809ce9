//! Polarized complex tori `C^n / Λ`: lattice arithmetic, the Hermitian form
//! `H` and its Riemann form `E = Im H`, geodesic lengths, semicharacters and
//! short-vector enumeration.
//!
//! Conventions: `H(u, w) = Σ u_i H_ij conj(w_j)` is linear in the first
//! argument, `E[i][j] = Im H(λ_i, λ_j)`, and the geodesic length of a loop
//! `v` is `ℓ(v) = sqrt(2π H(v, v))`.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::intlin;

/// Integrality tolerance for `Im H(λ_i, λ_j)`.
pub const TOL_INT: f64 = 1e-9;
/// Relative tie tolerance when grouping vectors into length shells.
pub const TOL_SHELL: f64 = 1e-9;
/// Default cap on the number of vectors a single enumeration may return.
pub const DEFAULT_MAX_TERMS: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub n: usize,
    pub positive_definite: bool,
    pub min_eigenvalue: f64,
    pub hermitian_residual: f64,
    /// `max |Im H(λ_i, λ_j) - round(Im H(λ_i, λ_j))|`
    pub integrality_residual: f64,
    pub riemann_rank: usize,
    /// `|Pf(E)|`, present when `E` is non-degenerate.
    pub pfaffian_abs: Option<u64>,
}

/// A lattice vector with its complex embedding and geodesic length.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeVector {
    pub coords: Vec<i64>,
    pub embedding: Vec<Complex64>,
    pub length: f64,
}

/// Lattice translate `c + x` (real center `c`, integer `x`) found by shifted
/// enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedVector {
    pub coords: Vec<i64>,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Shells {
    pub l1: f64,
    pub l2: f64,
    pub s1: Vec<LatticeVector>,
}

/// A point of the torus, given by a lift to `C^n` and its real coordinates
/// with respect to the lattice basis.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusPoint {
    pub lift: Vec<Complex64>,
    pub coords: Vec<f64>,
}

/// Semicharacter `χ: Λ -> U(1)` stored by its values `exp(2πi phases[i])` on
/// the basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Semicharacter {
    pub phases: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct PolarizedTorus {
    n: usize,
    basis: Vec<Vec<Complex64>>,
    h: DMatrix<Complex64>,
    riemann: Vec<Vec<i64>>,
    gram: DMatrix<f64>,
    basis_real_inv: DMatrix<f64>,
    report: ValidationReport,
    shells: Shells,
}

fn frac(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Validates raw torus data and returns the report, or the first violated
/// condition as an error.
pub fn validate(basis: &[Vec<Complex64>], h: &[Vec<Complex64>]) -> Result<ValidationReport> {
    PolarizedTorus::new(basis.to_vec(), h.to_vec()).map(|t| t.report)
}

impl PolarizedTorus {
    pub fn new(basis: Vec<Vec<Complex64>>, h: Vec<Vec<Complex64>>) -> Result<Self> {
        let n = h.len();
        if n == 0 {
            return Err(Error::Shape("H must be a non-empty square matrix".into()));
        }
        if h.iter().any(|r| r.len() != n) {
            return Err(Error::Shape(format!("H must be {n}x{n}")));
        }
        if basis.len() != 2 * n || basis.iter().any(|b| b.len() != n) {
            return Err(Error::Shape(format!("basis must hold {} vectors of {n} complex entries", 2 * n)));
        }
        if basis.iter().flatten().chain(h.iter().flatten()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Shape("non-finite entry".into()));
        }

        let hmat = DMatrix::from_fn(n, n, |i, j| h[i][j]);
        let scale = hmat.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let hermitian_residual =
            (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| (hmat[(i, j)] - hmat[(j, i)].conj()).norm()).fold(0.0, f64::max);
        if hermitian_residual > 1e-12 * scale {
            return Err(Error::NotHermitian { residual: hermitian_residual });
        }
        let sym = (&hmat + hmat.adjoint()).scale(0.5);
        let eig = SymmetricEigen::new(sym);
        let min_eigenvalue = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(min_eigenvalue > 1e-12 * scale) {
            return Err(Error::NotPositiveDefinite { min_eigenvalue });
        }

        let dim = 2 * n;
        let breal = DMatrix::from_fn(dim, dim, |r, c| if r < n { basis[c][r].re } else { basis[c][r - n].im });
        let sv = breal.clone().svd(false, false).singular_values;
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(smin > 1e-12 * smax) {
            return Err(Error::DegenerateBasis);
        }
        let basis_real_inv = breal.try_inverse().ok_or(Error::DegenerateBasis)?;

        let form = |u: &[Complex64], w: &[Complex64]| -> Complex64 {
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    s += u[i] * hmat[(i, j)] * w[j].conj();
                }
            }
            s
        };

        let mut riemann = vec![vec![0i64; dim]; dim];
        let mut integrality_residual: f64 = 0.0;
        let mut gram = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                let hij = form(&basis[i], &basis[j]);
                let e = hij.im;
                let r = e.round();
                integrality_residual = integrality_residual.max((e - r).abs());
                riemann[i][j] = r as i64;
                gram[(i, j)] = 2.0 * PI * hij.re;
            }
        }
        if integrality_residual > TOL_INT {
            return Err(Error::IntegralityViolation { residual: integrality_residual, tolerance: TOL_INT });
        }
        // enforce exact antisymmetry of the rounded form
        for i in 0..dim {
            riemann[i][i] = 0;
            for j in 0..i {
                if riemann[i][j] != -riemann[j][i] {
                    return Err(Error::IntegralityViolation { residual: integrality_residual, tolerance: TOL_INT });
                }
            }
        }
        let gram = (&gram + gram.transpose()).scale(0.5);

        let riemann_rank = intlin::rank(&riemann);
        let pfaffian_abs = if riemann_rank == dim {
            let det = intlin::determinant(&riemann).unsigned_abs();
            let root = (det as f64).sqrt().round() as u64;
            Some(root)
        } else {
            None
        };

        let report = ValidationReport {
            n,
            positive_definite: true,
            min_eigenvalue,
            hermitian_residual,
            integrality_residual,
            riemann_rank,
            pfaffian_abs,
        };

        let mut torus = PolarizedTorus {
            n,
            basis,
            h: hmat,
            riemann,
            gram,
            basis_real_inv,
            report,
            shells: Shells { l1: 0.0, l2: 0.0, s1: Vec::new() },
        };
        torus.shells = torus.compute_shells()?;
        Ok(torus)
    }

    /// Torus with basis `(1, i)` scaled so that `H = [[h]]` (used mostly in tests).
    pub fn square(h: f64) -> Result<Self> {
        PolarizedTorus::new(vec![vec![Complex64::new(1.0, 0.0)], vec![Complex64::new(0.0, 1.0)]], vec![vec![Complex64::new(h, 0.0)]])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Real rank of the lattice, `2n`.
    pub fn rank(&self) -> usize {
        2 * self.n
    }

    pub fn basis(&self) -> &[Vec<Complex64>] {
        &self.basis
    }

    pub fn hermitian_matrix(&self) -> &DMatrix<Complex64> {
        &self.h
    }

    pub fn report(&self) -> &ValidationReport {
        &self.report
    }

    /// Integer Riemann form on the basis, `E[i][j] = Im H(λ_i, λ_j)`.
    pub fn riemann(&self) -> &[Vec<i64>] {
        &self.riemann
    }

    /// Real Gram matrix `G[i][j] = 2π Re H(λ_i, λ_j)` of the geodesic metric.
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn shells(&self) -> &Shells {
        &self.shells
    }

    pub fn hermitian(&self, u: &[Complex64], w: &[Complex64]) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..self.n {
            for j in 0..self.n {
                s += u[i] * self.h[(i, j)] * w[j].conj();
            }
        }
        s
    }

    /// `E(u, w) = Im H(u, w)` for arbitrary vectors of `C^n`.
    pub fn riemann_form(&self, u: &[Complex64], w: &[Complex64]) -> f64 {
        self.hermitian(u, w).im
    }

    /// `E(a, b)` for integer coordinate vectors, computed exactly.
    pub fn riemann_int(&self, a: &[i64], b: &[i64]) -> i64 {
        let mut s = 0i64;
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                s += ai * self.riemann[i][j] * bj;
            }
        }
        s
    }

    /// Row of integers `E(v, λ_i)` for `i = 0..2n`.
    pub fn riemann_row(&self, v: &[i64]) -> Vec<i64> {
        (0..self.rank()).map(|i| v.iter().enumerate().map(|(j, &c)| c * self.riemann[j][i]).sum()).collect()
    }

    pub fn embed(&self, coords: &[i64]) -> Vec<Complex64> {
        let mut z = vec![Complex64::new(0.0, 0.0); self.n];
        for (c, b) in coords.iter().zip(&self.basis) {
            for (zi, bi) in z.iter_mut().zip(b) {
                *zi += *bi * (*c as f64);
            }
        }
        z
    }

    pub fn embed_real(&self, coords: &[f64]) -> Vec<Complex64> {
        let mut z = vec![Complex64::new(0.0, 0.0); self.n];
        for (c, b) in coords.iter().zip(&self.basis) {
            for (zi, bi) in z.iter_mut().zip(b) {
                *zi += *bi * *c;
            }
        }
        z
    }

    /// Real coordinates of `z` with respect to the lattice basis.
    pub fn coords_of(&self, z: &[Complex64]) -> Vec<f64> {
        let dim = self.rank();
        let mut rhs = vec![0.0; dim];
        for i in 0..self.n {
            rhs[i] = z[i].re;
            rhs[i + self.n] = z[i].im;
        }
        (0..dim).map(|r| (0..dim).map(|c| self.basis_real_inv[(r, c)] * rhs[c]).sum()).collect()
    }

    /// Geodesic length `sqrt(2π H(v, v))` of a vector of `C^n`.
    pub fn length(&self, v: &[Complex64]) -> f64 {
        (2.0 * PI * self.hermitian(v, v).re).max(0.0).sqrt()
    }

    /// Length computed from real lattice coordinates through the Gram matrix.
    pub fn length_of_coords(&self, coords: &[f64]) -> f64 {
        let dim = self.rank();
        let mut q = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                q += coords[i] * self.gram[(i, j)] * coords[j];
            }
        }
        q.max(0.0).sqrt()
    }

    pub fn lattice_vector(&self, coords: Vec<i64>) -> LatticeVector {
        let embedding = self.embed(&coords);
        let length = self.length(&embedding);
        LatticeVector { coords, embedding, length }
    }

    /// Volume of the torus for `ω^n / n!`: the Euclidean volume of a
    /// fundamental parallelepiped in the metric `G`.
    ///
    /// On `C/(Z + iZ)` with `H = [[1]]`, `G = 2π I` and the volume is `2π`,
    /// which matches `(2π)^n |Pf(E)|`.
    pub fn volume(&self) -> f64 {
        self.gram.determinant().sqrt()
    }

    pub fn point_from_coords(&self, coords: &[f64]) -> TorusPoint {
        TorusPoint { lift: self.embed_real(coords), coords: coords.to_vec() }
    }

    pub fn point_from_lift(&self, lift: &[Complex64]) -> TorusPoint {
        TorusPoint { lift: lift.to_vec(), coords: self.coords_of(lift) }
    }

    /// Representative with coordinates in `[0, 1)`.
    pub fn canonical(&self, p: &TorusPoint) -> TorusPoint {
        let coords: Vec<f64> = p.coords.iter().map(|&x| frac(x)).collect();
        self.point_from_coords(&coords)
    }

    /// Geodesic distance between two points of the torus.
    pub fn distance(&self, p: &[f64], q: &[f64]) -> f64 {
        let diff: Vec<f64> = p.iter().zip(q).map(|(a, b)| a - b).collect();
        let reduced: Vec<f64> = diff.iter().map(|d| d - d.round()).collect();
        let r0 = self.length_of_coords(&reduced);
        if r0 == 0.0 {
            return 0.0;
        }
        let found = self.enumerate_shifted(&diff, r0 * (1.0 + 1e-9) + 1e-300, DEFAULT_MAX_TERMS).unwrap_or_default();
        found.iter().map(|s| s.length).fold(r0, f64::min)
    }

    /// All nonzero lattice vectors with `ℓ(v) <= radius`, sorted by length and
    /// then lexicographically by coordinates.
    pub fn enumerate_within(&self, radius: f64) -> Result<Vec<LatticeVector>> {
        self.enumerate_within_capped(radius, DEFAULT_MAX_TERMS)
    }

    pub fn enumerate_within_capped(&self, radius: f64, cap: usize) -> Result<Vec<LatticeVector>> {
        if !(radius >= 0.0) {
            return Err(Error::InvalidArgument(format!("radius must be >= 0, got {radius}")));
        }
        let center = vec![0.0; self.rank()];
        let mut out: Vec<LatticeVector> = Vec::new();
        let mut overflow = false;
        fincke_pohst(&self.gram, &center, radius, &mut |x: &[i64]| {
            if x.iter().all(|&c| c == 0) {
                return true;
            }
            let v = self.lattice_vector(x.to_vec());
            if v.length <= radius {
                if out.len() >= cap {
                    overflow = true;
                    return false;
                }
                out.push(v);
            }
            true
        });
        if overflow {
            return Err(self.too_large(radius, cap));
        }
        sort_by_length_then_coords(&mut out, |v| v.length, |v| &v.coords);
        Ok(out)
    }

    /// All integer `x` with `ℓ(center + x) <= radius` (the zero vector
    /// included), sorted like [`Self::enumerate_within`].
    pub fn enumerate_shifted(&self, center: &[f64], radius: f64, cap: usize) -> Result<Vec<ShiftedVector>> {
        if !(radius >= 0.0) {
            return Err(Error::InvalidArgument(format!("radius must be >= 0, got {radius}")));
        }
        let mut out = Vec::new();
        let mut overflow = false;
        fincke_pohst(&self.gram, center, radius, &mut |x: &[i64]| {
            let y: Vec<f64> = x.iter().zip(center).map(|(&a, &c)| a as f64 + c).collect();
            let length = self.length_of_coords(&y);
            if length <= radius {
                if out.len() >= cap {
                    overflow = true;
                    return false;
                }
                out.push(ShiftedVector { coords: x.to_vec(), length });
            }
            true
        });
        if overflow {
            return Err(self.too_large(radius, cap));
        }
        sort_by_length_then_coords(&mut out, |v| v.length, |v| &v.coords);
        Ok(out)
    }

    fn too_large(&self, radius: f64, cap: usize) -> Error {
        let l1 = if self.shells.l1 > 0.0 { self.shells.l1 } else { self.min_basis_length() };
        let est = (1.0 + 2.0 * radius / l1).powi(self.rank() as i32);
        Error::RadiusTooLarge { radius, cap, required: est.min(usize::MAX as f64) as usize }
    }

    fn min_basis_length(&self) -> f64 {
        (0..self.rank()).map(|i| self.gram[(i, i)].sqrt()).fold(f64::INFINITY, f64::min)
    }

    fn compute_shells(&self) -> Result<Shells> {
        // 2v has length 2 l1 <= 2 min|λ_i|, so this radius reaches both l1 and l2.
        let radius = 2.0 * self.min_basis_length() * (1.0 + 1e-9);
        let vs = self.enumerate_within(radius)?;
        let l1 = vs[0].length;
        let tol = TOL_SHELL * l1;
        let s1: Vec<LatticeVector> = vs.iter().filter(|v| v.length <= l1 + tol).cloned().collect();
        let l2 = vs.iter().find(|v| v.length > l1 + tol).map(|v| v.length).unwrap_or(2.0 * l1);
        Ok(Shells { l1, l2, s1 })
    }

    /// Coordinates `z' = sqrt(2π) A z` in which the Kähler metric is the
    /// standard Euclidean one (`A^† A = H^T`).
    pub fn flat_coordinates(&self, z: &[Complex64]) -> Vec<Complex64> {
        let ht = self.h.transpose();
        let chol = Cholesky::new(ht).expect("H is positive definite");
        let a = chol.l().adjoint();
        let s = (2.0 * PI).sqrt();
        (0..self.n).map(|i| (0..self.n).map(|j| a[(i, j)] * z[j]).sum::<Complex64>() * s).collect()
    }

    /// Maximal linearly independent subset of `S1`, taking from each `±v`
    /// pair the representative whose first nonzero coordinate is positive.
    pub fn s1_independent(&self) -> Vec<LatticeVector> {
        let positive: Vec<&LatticeVector> =
            self.shells.s1.iter().filter(|v| v.coords.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)).collect();
        let mut chosen: Vec<LatticeVector> = Vec::new();
        let mut rows: Vec<Vec<i64>> = Vec::new();
        for v in positive {
            rows.push(v.coords.clone());
            if intlin::rank(&rows) == rows.len() {
                chosen.push(v.clone());
            } else {
                rows.pop();
            }
        }
        chosen
    }
}

fn sort_by_length_then_coords<T>(items: &mut [T], len: impl Fn(&T) -> f64, coords: impl Fn(&T) -> &Vec<i64>) {
    items.sort_by(|a, b| len(a).total_cmp(&len(b)));
    let mut start = 0;
    while start < items.len() {
        let base = len(&items[start]);
        let mut end = start + 1;
        while end < items.len() && len(&items[end]) - base <= 1e-12 * base.max(1e-300) {
            end += 1;
        }
        items[start..end].sort_by(|a, b| coords(a).cmp(coords(b)));
        start = end;
    }
}

/// Fincke–Pohst enumeration of integer `x` with `(x + c)^T G (x + c) <= r^2`
/// (plus a small slack; callers filter exactly). The visitor returns `false`
/// to abort.
pub(crate) fn fincke_pohst(gram: &DMatrix<f64>, center: &[f64], radius: f64, visit: &mut dyn FnMut(&[i64]) -> bool) {
    let dim = gram.nrows();
    let chol = Cholesky::new(gram.clone()).expect("Gram matrix is positive definite");
    let l = chol.l();
    // G = R^T R with R = L^T upper triangular
    let diag: Vec<f64> = (0..dim).map(|i| l[(i, i)]).collect();
    let mu: Vec<Vec<f64>> = (0..dim).map(|i| (0..dim).map(|j| if j > i { l[(j, i)] / diag[i] } else { 0.0 }).collect()).collect();
    let bound = radius * radius * (1.0 + 1e-10) + 1e-300;
    let mut x = vec![0i64; dim];
    let mut y = vec![0.0f64; dim];

    struct Ctx<'a> {
        dim: usize,
        diag: &'a [f64],
        mu: &'a [Vec<f64>],
        center: &'a [f64],
    }

    fn descend(ctx: &Ctx, level: usize, remaining: f64, x: &mut [i64], y: &mut [f64], visit: &mut dyn FnMut(&[i64]) -> bool) -> bool {
        let i = level;
        let target: f64 = -(i + 1..ctx.dim).map(|j| ctx.mu[i][j] * y[j]).sum::<f64>();
        let half = remaining.max(0.0).sqrt() / ctx.diag[i];
        let slack = 1e-9 * (1.0 + half);
        let lo = (target - ctx.center[i] - half - slack).ceil() as i64;
        let hi = (target - ctx.center[i] + half + slack).floor() as i64;
        for xi in lo..=hi {
            x[i] = xi;
            y[i] = xi as f64 + ctx.center[i];
            let d = (y[i] - target) * ctx.diag[i];
            let rem = remaining - d * d;
            if rem < -1e-12 * (1.0 + remaining.abs()) {
                continue;
            }
            if i == 0 {
                if !visit(x) {
                    return false;
                }
            } else if !descend(ctx, i - 1, rem, x, y, visit) {
                return false;
            }
        }
        x[i] = 0;
        y[i] = 0.0;
        true
    }

    let ctx = Ctx { dim, diag: &diag, mu: &mu, center };
    descend(&ctx, dim - 1, bound, &mut x, &mut y, visit);
}

impl Semicharacter {
    pub fn new(phases: Vec<f64>) -> Self {
        Semicharacter { phases: phases.into_iter().map(frac).collect() }
    }

    /// The semicharacter with all basis values equal to 1.
    pub fn trivial(rank: usize) -> Self {
        Semicharacter { phases: vec![0.0; rank] }
    }

    /// `arg χ(Σ n_i λ_i) / 2π` reduced to `[0, 1)`.
    pub fn turns(&self, torus: &PolarizedTorus, coords: &[i64]) -> f64 {
        let e = torus.riemann();
        let mut cross: i128 = 0;
        for i in 0..coords.len() {
            for j in i + 1..coords.len() {
                cross += coords[i] as i128 * coords[j] as i128 * e[i][j] as i128;
            }
        }
        let half = if cross.rem_euclid(2) == 1 { 0.5 } else { 0.0 };
        let linear: f64 = coords.iter().zip(&self.phases).map(|(&c, &p)| frac(c as f64 * p)).sum();
        frac(linear + half)
    }

    pub fn eval(&self, torus: &PolarizedTorus, coords: &[i64]) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * PI * self.turns(torus, coords))
    }

    /// Phases of `χ^k` on the basis.
    pub fn power(&self, k: u32) -> Semicharacter {
        Semicharacter::new(self.phases.iter().map(|p| frac(p * k as f64)).collect())
    }
}

/// `χ(Σ n_i λ_i) = Π χ(λ_i)^{n_i} · exp(iπ Σ_{i<j} n_i n_j E[i][j])`.
pub fn chi_eval(chi: &Semicharacter, torus: &PolarizedTorus, coords: &[i64]) -> Complex64 {
    chi.eval(torus, coords)
}

/// Unitary `U` with `U v = (0, …, 0, i|v|)`: the normal form in which the
/// quotient `C^n / <v>` becomes `C^{n-1} × C^*`. `v` must be nonzero and
/// given in flat coordinates.
pub fn cylinder_frame(v: &[Complex64]) -> DMatrix<Complex64> {
    let n = v.len();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    assert!(norm > 0.0, "cylinder_frame needs a nonzero vector");
    let vhat: Vec<Complex64> = v.iter().map(|z| z / norm).collect();
    let mut frame: Vec<Vec<Complex64>> = vec![vhat.clone()];
    for e in 0..n {
        if frame.len() == n {
            break;
        }
        let mut w: Vec<Complex64> = (0..n).map(|i| Complex64::new(f64::from(u8::from(i == e)), 0.0)).collect();
        for b in &frame {
            let proj: Complex64 = b.iter().zip(&w).map(|(bi, wi)| bi.conj() * wi).sum();
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi -= proj * bi;
            }
        }
        let wn = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if wn > 1e-8 {
            frame.push(w.into_iter().map(|z| z / wn).collect());
        }
    }
    // rows of U: conj(b_1), …, conj(b_{n-1}), i·conj(vhat)
    let i = Complex64::new(0.0, 1.0);
    DMatrix::from_fn(n, n, |r, c| if r + 1 < n { frame[r + 1][c].conj() } else { i * vhat[c].conj() })
}
