//! JSON description of a polarized torus with a semicharacter and a power.
//!
//! ```json
//! { "n": 1,
//!   "basis": [[[1, 0]], [[0, 1]]],
//!   "H": [[{"re": 1, "im": 0}]],
//!   "chi_phases": [0, 0],
//!   "k": 1 }
//! ```
//!
//! A basis vector may also be written flat as `[re, im, re, im, …]`, and an
//! entry of `H` as `[re, im]`. `chi_phases` defaults to zeros and `k` to 1.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{PolarizedTorus, Semicharacter};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexEntry {
    Object { re: f64, im: f64 },
    Pair([f64; 2]),
}

impl From<ComplexEntry> for Complex64 {
    fn from(e: ComplexEntry) -> Self {
        match e {
            ComplexEntry::Object { re, im } | ComplexEntry::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BasisVector {
    Nested(Vec<ComplexEntry>),
    Flat(Vec<f64>),
}

impl BasisVector {
    fn to_complex(&self, n: usize) -> Result<Vec<Complex64>> {
        let v: Vec<Complex64> = match self {
            BasisVector::Nested(e) => e.iter().map(|&c| c.into()).collect(),
            BasisVector::Flat(f) => {
                if f.len() % 2 != 0 {
                    return Err(Error::ConfigParseError("flat basis vector needs an even number of reals".into()));
                }
                f.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect()
            }
        };
        if v.len() != n {
            return Err(Error::Shape(format!("basis vector has {} complex entries, expected {n}", v.len())));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusConfig {
    pub n: usize,
    pub basis: Vec<BasisVector>,
    #[serde(rename = "H")]
    pub h: Vec<Vec<ComplexEntry>>,
    #[serde(default)]
    pub chi_phases: Option<Vec<f64>>,
    #[serde(default)]
    pub k: Option<u32>,
}

impl TorusConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::ConfigParseError(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::ConfigParseError(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn torus(&self) -> Result<PolarizedTorus> {
        if self.n == 0 {
            return Err(Error::Shape("n must be >= 1".into()));
        }
        let basis = self.basis.iter().map(|b| b.to_complex(self.n)).collect::<Result<Vec<_>>>()?;
        let h = self.h.iter().map(|row| row.iter().map(|&c| c.into()).collect()).collect();
        PolarizedTorus::new(basis, h)
    }

    pub fn semicharacter(&self) -> Result<Semicharacter> {
        match &self.chi_phases {
            None => Ok(Semicharacter::trivial(2 * self.n)),
            Some(p) if p.len() == 2 * self.n => Ok(Semicharacter::new(p.clone())),
            Some(p) => Err(Error::Shape(format!("chi_phases has {} entries, expected {}", p.len(), 2 * self.n))),
        }
    }

    pub fn k(&self) -> u32 {
        self.k.unwrap_or(1)
    }
}
