//! Exact Bergman kernel densities of polarized complex tori.
//!
//! The density of `L^k` on `X = C^n / Λ` is a Gaussian sum over geodesic
//! loops weighted by their holonomies. This crate evaluates that sum with
//! certified truncation and checks it against independent oracles: a
//! theta-function Gram-matrix computation (n = 1), the flat-cylinder series
//! and its Poisson-summed form, and direct integration of parallel transport.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod cylinder;
pub mod error;
pub mod exec;
pub mod extrema;
pub mod holonomy;
pub mod intlin;
pub mod kernel;
pub mod lattice;
pub mod optimize;
pub mod theta;

pub use config::TorusConfig;
pub use error::{Error, Result};
pub use exec::Execution;
pub use lattice::{LatticeVector, PolarizedTorus, Semicharacter, TorusPoint};
