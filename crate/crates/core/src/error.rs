//! Error type shared by every module of the library.

use thiserror::Error;

/// Failures raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("shift {k} outside materialized window [{lo}, {hi}]")]
    OutOfWindow { k: i64, lo: i64, hi: i64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("root finder did not converge on branch {branch} (target {target})")]
    BranchInversion { branch: usize, target: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("warm-up of {warmup} steps insufficient (gap {gap:.3e} > {tol:.1e}); try {suggested}")]
    WarmupInsufficient { warmup: usize, gap: f64, tol: f64, suggested: usize },

    #[error("burn-in of {burn_in} steps insufficient (gap {gap:.3e} > {tol:.1e}); try {suggested}")]
    BurnInInsufficient { burn_in: usize, gap: f64, tol: f64, suggested: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("empty ensemble")]
    EmptyEnsemble,
}

pub type Result<T> = std::result::Result<T, Error>;
