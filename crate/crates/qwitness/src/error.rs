//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: u128, cap: usize },

    #[error("entry count {got} does not match dim^2 = {expected}")]
    BadEntryCount { got: usize, expected: usize },

    #[error("matrix is not Hermitian within {tol:e}: max deviation {deviation:e}")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("not a valid density matrix: {reason}")]
    InvalidDensity { reason: String },

    #[error("parameter {name} = {value} outside {expected}")]
    ParamRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("cannot normalize a zero vector")]
    ZeroVector,

    #[error("eigensolver failed to converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("operator action failed the Hermiticity probe: deviation {deviation:e}")]
    NonHermitianAction { deviation: f64 },

    #[error("no usable sign change of the minimum eigenvalue on [0, 1] for {family} n = {n}: {detail}")]
    NoSignChange {
        family: &'static str,
        n: u32,
        detail: String,
    },

    #[error("least-squares fit needs at least {needed} records, got {got}")]
    TooFewRecords { needed: usize, got: usize },

    #[error("least-squares system is rank deficient")]
    RankDeficient,

    #[error("operation unsupported: {0}")]
    Unsupported(&'static str),

    #[error("internal consistency violation: {0}")]
    Internal(String),

    #[error("malformed table: {0}")]
    Parse(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
