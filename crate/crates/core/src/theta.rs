//! Theta-function basis of `H^0(X, L^k)` for elliptic curves, its Gram
//! matrix by quadrature, and the Bergman kernel built from them. Nothing
//! here uses the loop series, so it serves as an independent reference.
//!
//! With `μ1, μ2` the lattice basis ordered so that `τ = μ2/μ1` lies in the
//! upper half plane and `w = z/μ1`, the sections are
//! `f_j(w) = exp(πK w^2/2) Σ_m exp(πiτ(N m^2 + 2m(j+a)) - 2πi b m + 2πi(j + mN + a) w)`
//! for `j = 0..N`, with `K = k h |μ1|^2`, `N = k d`, `a = k·arg χ(μ1)/2π` and
//! `b = k·arg χ(μ2)/2π`.

use std::f64::consts::{LN_10, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::{map_range, Execution};
use crate::lattice::{PolarizedTorus, Semicharacter, TorusPoint};

pub const DEFAULT_QUAD_RES: usize = 128;
const RESIDUAL_TOL: f64 = 1e-9;
const GRAM_TOL: f64 = 1e-8;

/// Torus `C / (Z + τZ)` with `H = [[d / Im τ]]`, so that `|E(1, τ)| = d`.
pub fn torus_from_tau(tau: Complex64, d: u32) -> Result<PolarizedTorus> {
    if !(tau.im > 0.0) || d == 0 {
        return Err(Error::InvalidArgument(format!("need Im tau > 0 and d >= 1, got tau = {tau}, d = {d}")));
    }
    let h = f64::from(d) / tau.im;
    PolarizedTorus::new(vec![vec![Complex64::new(1.0, 0.0)], vec![tau]], vec![vec![Complex64::new(h, 0.0)]])
}

#[derive(Debug, Clone)]
pub struct ThetaBasis {
    torus: PolarizedTorus,
    chi: Semicharacter,
    k: u32,
    pub tau: Complex64,
    pub d: u32,
    pub dim: usize,
    /// Characteristic `(j + a)/N` of each section, with `b` shared.
    pub char_offsets: Vec<f64>,
    pub char_b: f64,
    pub series_cutoff: usize,
    /// Index into the torus basis of `μ1` (the other one is `μ2`).
    first: usize,
    mu1: Complex64,
    big_k: f64,
    h: f64,
    /// Largest functional-equation residual found during construction.
    pub residual: f64,
}

fn required_cutoff(tau: Complex64, n: usize) -> usize {
    (18.0 * LN_10 / (PI * tau.im * n as f64)).sqrt().ceil() as usize + 1
}

fn frac(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

impl ThetaBasis {
    /// Builds the basis for `(torus, χ, k)`. `cutoff` overrides the number of
    /// theta terms kept on each side of the peak; too small a value is
    /// rejected rather than silently used.
    pub fn new(torus: &PolarizedTorus, chi: &Semicharacter, k: u32, cutoff: Option<usize>) -> Result<Self> {
        if torus.n() != 1 {
            return Err(Error::InvalidArgument(format!("theta basis needs n = 1, got n = {}", torus.n())));
        }
        if k == 0 {
            return Err(Error::InvalidArgument("k must be >= 1".into()));
        }
        if chi.phases.len() != 2 {
            return Err(Error::Shape(format!("semicharacter needs 2 phases, got {}", chi.phases.len())));
        }
        let l = [torus.basis()[0][0], torus.basis()[1][0]];
        let first = if (l[1] / l[0]).im > 0.0 { 0 } else { 1 };
        let (mu1, mu2) = (l[first], l[1 - first]);
        let tau = mu2 / mu1;
        let h = torus.hermitian_matrix()[(0, 0)].re;
        let d = torus.riemann()[0][1].unsigned_abs() as u32;
        let kf = f64::from(k);
        let dim = (k * d) as usize;
        let a = frac(kf * chi.phases[first]);
        let b = frac(kf * chi.phases[1 - first]);
        let required = required_cutoff(tau, dim);
        let series_cutoff = match cutoff {
            Some(given) if given < required => return Err(Error::CutoffTooSmall { given, required }),
            Some(given) => given,
            None => required,
        };
        let mut basis = ThetaBasis {
            torus: torus.clone(),
            chi: chi.clone(),
            k,
            tau,
            d,
            dim,
            char_offsets: (0..dim).map(|j| (j as f64 + a) / dim as f64).collect(),
            char_b: b,
            series_cutoff,
            first,
            mu1,
            big_k: kf * h * mu1.norm_sqr(),
            h,
            residual: 0.0,
        };
        basis.residual = basis.functional_equation_residual();
        if !(basis.residual < RESIDUAL_TOL) {
            return Err(Error::CharacteristicSolveFailed { residual: basis.residual });
        }
        Ok(basis)
    }

    pub fn torus(&self) -> &PolarizedTorus {
        &self.torus
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// `f_j(z) exp(-(kπ/2) H(z, z))`, whose modulus is the pointwise norm.
    pub fn eval_normalized(&self, j: usize, z: Complex64) -> Complex64 {
        let n = self.dim as f64;
        let w = z / self.mu1;
        let tau = self.tau;
        let ja = self.char_offsets[j] * n;
        let i = Complex64::i();
        let center = -ja / n - w.im / tau.im;
        let mc = center.round() as i64;
        let m_cut = self.series_cutoff as i64;
        // exp(πK(w^2 - |w|^2)/2)
        let gauss = PI * self.big_k * (w * w - w.norm_sqr()) / 2.0;
        let mut sum = Complex64::new(0.0, 0.0);
        for m in (mc - m_cut)..=(mc + m_cut) {
            let mf = m as f64;
            let expo = i * PI * tau * (n * mf * mf + 2.0 * mf * ja) - i * (2.0 * PI * self.char_b * mf)
                + i * (2.0 * PI) * (ja + mf * n) * w
                + gauss;
            sum += expo.exp();
        }
        sum
    }

    /// All normalized sections at `z`.
    pub fn eval_all(&self, z: Complex64) -> Vec<Complex64> {
        (0..self.dim).map(|j| self.eval_normalized(j, z)).collect()
    }

    /// Unit phase of the automorphy factor `a_k(λ, z)` for the torus basis
    /// vector with index `which`.
    fn automorphy_phase(&self, which: usize, z: Complex64) -> Complex64 {
        let lambda = self.torus.basis()[which][0];
        let kf = f64::from(self.k);
        let turns = kf * self.chi.phases[which] + kf * self.h * (z * lambda.conj()).im / 2.0;
        Complex64::from_polar(1.0, 2.0 * PI * turns)
    }

    /// `max |F_j(z + λ) - phase(a_k(λ, z)) F_j(z)|` over twenty fixed points
    /// and both basis vectors, relative to the largest `|F_j|` seen.
    pub fn functional_equation_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for s in 0..20 {
            let x = frac(0.5 + s as f64 * 0.618_033_988_749_894_9);
            let y = frac(0.25 + s as f64 * 0.754_877_666_246_692_7);
            let z = self.torus.embed_real(&[x, y])[0];
            for which in 0..2 {
                let shifted = z + self.torus.basis()[which][0];
                let phase = self.automorphy_phase(which, z);
                for j in 0..self.dim {
                    let f0 = self.eval_normalized(j, z);
                    let f1 = self.eval_normalized(j, shifted);
                    scale = scale.max(f0.norm()).max(f1.norm());
                    worst = worst.max((f1 - phase * f0).norm());
                }
            }
        }
        if scale > 0.0 {
            worst / scale
        } else {
            f64::INFINITY
        }
    }

    /// Index into the torus basis of the vector used as `μ1`.
    pub fn first_index(&self) -> usize {
        self.first
    }
}

/// `build_basis` by `(τ, d)`, on [`torus_from_tau`].
pub fn build_basis(tau: Complex64, d: u32, chi: &Semicharacter, k: u32, cutoff: Option<usize>) -> Result<ThetaBasis> {
    ThetaBasis::new(&torus_from_tau(tau, d)?, chi, k, cutoff)
}

#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub entries: DMatrix<Complex64>,
    pub quad_res: usize,
    /// Relative change against the half-resolution rule.
    pub change: f64,
    /// `(G^{-1})^T`, so that `K(x, y) = Σ F_i(x) M_ij conj F_j(y)`.
    kernel: DMatrix<Complex64>,
}

impl GramMatrix {
    pub fn kernel_matrix(&self) -> &DMatrix<Complex64> {
        &self.kernel
    }

    /// `Σ a_i M_ij conj b_j`.
    fn pair(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for (i, ai) in a.iter().enumerate() {
            for (j, bj) in b.iter().enumerate() {
                s += ai * self.kernel[(i, j)] * bj.conj();
            }
        }
        s
    }
}

/// Gram matrix `∫ F_i conj F_j dVol` by the tensor trapezoidal rule on
/// lattice coordinates. `quad_res` must be even; the rule on the even
/// subgrid supplies the convergence estimate.
pub fn gram(basis: &ThetaBasis, quad_res: usize, exec: Execution) -> Result<GramMatrix> {
    if quad_res < 4 || !quad_res.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("quad_res must be even and >= 4, got {quad_res}")));
    }
    let torus = basis.torus();
    let nd = basis.dim;
    let res = quad_res;
    let rows: Vec<(DMatrix<Complex64>, DMatrix<Complex64>)> = map_range(exec, res, |i| {
        let mut fine = DMatrix::zeros(nd, nd);
        let mut coarse = DMatrix::zeros(nd, nd);
        for j in 0..res {
            let z = torus.embed_real(&[i as f64 / res as f64, j as f64 / res as f64])[0];
            let f = basis.eval_all(z);
            for a in 0..nd {
                for b in 0..nd {
                    let v = f[a] * f[b].conj();
                    fine[(a, b)] += v;
                    if i % 2 == 0 && j % 2 == 0 {
                        coarse[(a, b)] += v;
                    }
                }
            }
        }
        (fine, coarse)
    });
    let mut fine = DMatrix::<Complex64>::zeros(nd, nd);
    let mut coarse = DMatrix::<Complex64>::zeros(nd, nd);
    for (f, c) in rows {
        fine += f;
        coarse += c;
    }
    let vol = torus.volume();
    fine *= Complex64::new(vol / (res * res) as f64, 0.0);
    coarse *= Complex64::new(vol / ((res / 2) * (res / 2)) as f64, 0.0);
    let scale = fine.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let change = (&fine - &coarse).iter().map(|z| z.norm()).fold(0.0, f64::max) / scale.max(f64::MIN_POSITIVE);
    if !(change < GRAM_TOL) {
        return Err(Error::GramUnconverged { change });
    }
    // symmetrize away rounding before factoring
    let entries = (&fine + fine.adjoint()) * Complex64::new(0.5, 0.0);
    let chol = entries.clone().cholesky().ok_or(Error::SingularGram)?;
    let inv = chol.inverse();
    if inv.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::SingularGram);
    }
    Ok(GramMatrix { entries, quad_res, change, kernel: inv.transpose() })
}

/// `ρ_k(p)` from the orthonormalized theta basis.
pub fn rho_oracle(basis: &ThetaBasis, gram: &GramMatrix, p: &TorusPoint) -> f64 {
    let f = basis.eval_all(basis.torus().canonical(p).lift[0]);
    gram.pair(&f, &f).re.max(0.0)
}

/// `|K_k(x, y)|_{h^k}` from the orthonormalized theta basis.
pub fn offdiag_oracle(basis: &ThetaBasis, gram: &GramMatrix, x: &TorusPoint, y: &TorusPoint) -> f64 {
    let t = basis.torus();
    let fx = basis.eval_all(t.canonical(x).lift[0]);
    let fy = basis.eval_all(t.canonical(y).lift[0]);
    gram.pair(&fx, &fy).norm()
}

/// Basis and Gram matrix bundled for repeated evaluation.
#[derive(Debug, Clone)]
pub struct ThetaOracle {
    pub basis: ThetaBasis,
    pub gram: GramMatrix,
}

impl ThetaOracle {
    pub fn new(torus: &PolarizedTorus, chi: &Semicharacter, k: u32) -> Result<Self> {
        Self::with_res(torus, chi, k, DEFAULT_QUAD_RES, Execution::default())
    }

    pub fn with_res(torus: &PolarizedTorus, chi: &Semicharacter, k: u32, quad_res: usize, exec: Execution) -> Result<Self> {
        let basis = ThetaBasis::new(torus, chi, k, None)?;
        let gram = gram(&basis, quad_res, exec)?;
        Ok(ThetaOracle { basis, gram })
    }

    pub fn rho(&self, coords: &[f64]) -> f64 {
        rho_oracle(&self.basis, &self.gram, &self.basis.torus().point_from_coords(coords))
    }

    pub fn offdiag(&self, x: &[f64], y: &[f64]) -> f64 {
        let t = self.basis.torus();
        offdiag_oracle(&self.basis, &self.gram, &t.point_from_coords(x), &t.point_from_coords(y))
    }

    /// `K(x, y)` as a complex number in the trivialization of the normalized
    /// sections.
    pub fn kernel(&self, x: &[f64], y: &[f64]) -> Complex64 {
        let t = self.basis.torus();
        let fx = self.basis.eval_all(t.embed_real(x)[0]);
        let fy = self.basis.eval_all(t.embed_real(y)[0]);
        self.gram.pair(&fx, &fy)
    }
}
