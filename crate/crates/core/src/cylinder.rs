//! Twisted Bergman density on the flat cylinder `C^{n-1} × C^*`, both as the
//! orthogonal-monomial series and in Poisson-summed form.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::PolarizedTorus;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderParams {
    /// Circumference over 2π.
    pub eta: f64,
    /// Twist in `[0, 1)`.
    pub alpha: f64,
    pub k: u32,
    /// Axial coordinate `log|z|`.
    pub t: f64,
    pub n: usize,
}

impl CylinderParams {
    pub fn new(eta: f64, alpha: f64, k: u32, t: f64) -> Result<Self> {
        Self::with_dim(eta, alpha, k, t, 1)
    }

    pub fn with_dim(eta: f64, alpha: f64, k: u32, t: f64, n: usize) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidArgument(format!("eta must be > 0, got {eta}")));
        }
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::InvalidArgument(format!("alpha must lie in [0, 1), got {alpha}")));
        }
        if k == 0 || n == 0 || !t.is_finite() {
            return Err(Error::InvalidArgument("k and n must be >= 1, t finite".into()));
        }
        Ok(CylinderParams { eta, alpha, k, t, n })
    }

    /// Cylinder obtained by quotienting by the loop `v` of the torus: the
    /// circumference is `ℓ(v)`.
    pub fn for_loop(torus: &PolarizedTorus, v: &[i64], alpha: f64, k: u32, t: f64) -> Result<Self> {
        let length = torus.length(&torus.embed(v));
        Self::with_dim(length / (2.0 * PI), alpha, k, t, torus.n())
    }

    /// `m_k = kα - ⌊kα⌋`.
    pub fn m_k(&self) -> f64 {
        let x = f64::from(self.k) * self.alpha;
        let m = x - x.floor();
        if m >= 1.0 {
            0.0
        } else {
            m
        }
    }

    fn sigma(&self) -> f64 {
        f64::from(self.k) * self.eta * self.eta
    }
}

/// `I_a = 2π η^2 exp((a - m_k)^2 / (kη^2)) sqrt(π / (kη^2))`.
pub fn norm_integral_ia(params: &CylinderParams, a: i64) -> f64 {
    let s = params.sigma();
    let d = a as f64 - params.m_k();
    2.0 * PI * params.eta * params.eta * (d * d / s).exp() * (PI / s).sqrt()
}

/// Direct series `h_η^k |z|^{-2m_k} Σ_a |z|^{2a} / I_a`, summed around its
/// Gaussian peak `a* = m_k + kη^2 t`.
pub fn rho_cyl_direct(params: &CylinderParams) -> f64 {
    let s = params.sigma();
    let center = params.m_k() + s * params.t;
    // exp(-A^2/s) < 1e-14 · (sum ≈ sqrt(πs))
    let reach = (s * (14.0 * std::f64::consts::LN_10 + (PI * s).sqrt().max(1.0).ln())).sqrt().ceil() as i64 + 2;
    let c = center.round() as i64;
    let mut sum = 0.0;
    // add from the outside in so the small terms are not swamped
    let mut offsets: Vec<i64> = (-reach..=reach).collect();
    offsets.sort_by_key(|o| std::cmp::Reverse(o.abs()));
    for o in offsets {
        let d = (c + o) as f64 - center;
        sum += (-d * d / s).exp();
    }
    let k = f64::from(params.k);
    sum / (2.0 * PI) * (k / PI).sqrt() / params.eta
}

/// Poisson-summed form `(k/2π) Σ_ξ exp(-kη^2π^2ξ^2) cos(2πξ m_k + 2kη^2πξ t)`.
pub fn rho_cyl_poisson(params: &CylinderParams) -> f64 {
    let s = params.sigma();
    let k = f64::from(params.k);
    let mut sum = 1.0;
    let mut xi = 1i64;
    loop {
        let x = xi as f64;
        let w = (-s * PI * PI * x * x).exp();
        if w < 1e-17 {
            break;
        }
        sum += 2.0 * w * (2.0 * PI * x * (params.m_k() + s * params.t)).cos();
        xi += 1;
    }
    k / (2.0 * PI) * sum
}

/// `ρ` on `C^{n-1} × C^*`: the flat factor `(k/2π)^{n-1}` times the 1-d form.
pub fn rho_cyl_nd(params: &CylinderParams) -> f64 {
    let k = f64::from(params.k);
    (k / (2.0 * PI)).powi(params.n as i32 - 1) * rho_cyl_poisson(params)
}

/// The `n`-dimensional density from the orthogonal basis `w'^a w_n^b`
/// at transverse position `w'`: the weight `exp(-(k/2)|w'|^2)` times
/// `Σ_a |w'^a|^2 k^{|a|+n-1} / ((2π)^{n-1} 2^{|a|} a!)` times the 1-d series.
/// The `a`-sum is accumulated term by term rather than in closed form.
pub fn rho_cyl_nd_direct(params: &CylinderParams, w_prime: &[Complex64]) -> f64 {
    assert_eq!(w_prime.len() + 1, params.n, "w' must have n - 1 entries");
    let k = f64::from(params.k);
    let mut transverse = 1.0;
    for w in w_prime {
        let x = k * w.norm_sqr() / 2.0;
        let mut term = 1.0;
        let mut s = 1.0;
        let mut a = 1.0;
        while term > 1e-18 * s || a < x {
            term *= x / a;
            s += term;
            a += 1.0;
        }
        transverse *= (-x).exp() * s * k / (2.0 * PI);
    }
    transverse * rho_cyl_direct(params)
}

/// Holonomy `exp(-2πiξ m_k - 2ikη^2πξ t)` of the loop with winding `-ξ`.
pub fn cyl_holonomy_phase(params: &CylinderParams, xi: i64) -> Complex64 {
    let x = xi as f64;
    let arg = -2.0 * PI * x * params.m_k() - 2.0 * f64::from(params.k) * params.eta * params.eta * PI * x * params.t;
    Complex64::from_polar(1.0, arg)
}

/// The loop-sum form on the rank-one lattice `<v>` with `ℓ(ξv) = 2πη|ξ|`,
/// using the holonomies above.
pub fn rho_cyl_loop_sum(params: &CylinderParams) -> f64 {
    let k = f64::from(params.k);
    let mut sum = 1.0;
    for xi in 1i64.. {
        let len = 2.0 * PI * params.eta * xi as f64;
        let w = (-(k / 4.0) * len * len).exp();
        if w < 1e-17 {
            break;
        }
        sum += w * (cyl_holonomy_phase(params, xi).re + cyl_holonomy_phase(params, -xi).re);
    }
    k / (2.0 * PI) * sum
}
