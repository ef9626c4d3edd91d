use thiserror::Error;

/// Errors raised anywhere in the key-rate engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not positive semidefinite (smallest eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),
    #[error("non-finite matrix entry")]
    NonFinite,
    #[error("support violation: weight {0:e} outside the support of sigma")]
    SupportViolation(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("infeasible problem: {0}")]
    Infeasible(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
