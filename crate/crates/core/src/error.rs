use thiserror::Error;

/// Errors produced by the library. Variants map onto the CLI's exit codes:
/// everything here is a semantic/validation failure.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("matrix contains a non-finite entry")]
    NonFinite,
    #[error("matrix is not Hermitian (relative defect {0:.3e})")]
    NotHermitian(f64),
    #[error("map is not completely positive (minimum Choi eigenvalue {0:.3e})")]
    NotCompletelyPositive(f64),
    #[error("instrument is not trace preserving (deviation {0:.3e})")]
    NotTracePreserving(f64),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("eigendecomposition did not converge")]
    NoConvergence,
}

pub type Result<T> = std::result::Result<T, Error>;
