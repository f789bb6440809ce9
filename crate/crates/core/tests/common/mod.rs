#![allow(dead_code)]

use num_complex::Complex64;

use bergman_core::PolarizedTorus;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn sq1() -> PolarizedTorus {
    PolarizedTorus::square(1.0).unwrap()
}

pub fn d2() -> PolarizedTorus {
    PolarizedTorus::square(2.0).unwrap()
}

/// `Z^n + Ω Z^n` with `H = (Im Ω)^{-1}`, for symmetric `Ω = X + iY`, `Y > 0`.
pub fn siegel2(x: [f64; 3], y: [f64; 3]) -> PolarizedTorus {
    let om = [[c(x[0], y[0]), c(x[1], y[1])], [c(x[1], y[1]), c(x[2], y[2])]];
    let det = y[0] * y[2] - y[1] * y[1];
    let h = [[y[2] / det, -y[1] / det], [-y[1] / det, y[0] / det]];
    let basis = vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)], vec![om[0][0], om[1][0]], vec![om[0][1], om[1][1]]];
    let hm = h.iter().map(|r| r.iter().map(|&v| c(v, 0.0)).collect()).collect();
    PolarizedTorus::new(basis, hm).unwrap()
}

pub fn product2() -> PolarizedTorus {
    siegel2([0.0, 0.0, 0.0], [1.0, 0.0, 1.0])
}

/// Distance between phases in turns.
pub fn circ(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}
