//! Quenched thermodynamic formalism for random non-uniformly expanding maps.
//!
//! The crate builds the eigen-triple `(λ_ω, h_ω, ν_ω)` of the random
//! Ruelle–Perron–Frobenius operator on grid-sampled fibers, detects
//! hyperbolic times along random orbits and evaluates the associated
//! thermodynamic diagnostics: weak Gibbs ratios, pressure estimators,
//! correlation decay and cylinder counts.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod base;
pub mod error;
pub mod fiber;
pub mod hyperbolic;
pub mod space;
pub mod thermo;
pub mod transfer;

pub use error::{Error, Result};
