use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("state vector norm is {norm}, expected 1")]
    NotNormalized { norm: f64 },

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("operator trace is {trace}, expected 1")]
    NotTraceOne { trace: f64 },

    #[error("operator has negative eigenvalue {eigenvalue:e}")]
    NotPositive { eigenvalue: f64 },

    #[error("invalid probabilities: {0}")]
    InvalidProbabilities(String),

    #[error("ensemble has no members with nonzero probability")]
    EmptyEnsemble,

    #[error("invalid subsystem partition: {0}")]
    InvalidPartition(String),

    #[error("value {0} is outside the domain [0, 1]")]
    DomainError(f64),

    #[error("basis is not orthonormal (max Gram deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },

    #[error("operation requires a subsystem partition")]
    MissingPartition,

    #[error("signal {index} is not a pure state")]
    NotPure { index: usize },

    #[error("signal supports span {rank} of {dim} dimensions; a full-span ensemble is required")]
    NotFullSpan { rank: usize, dim: usize },

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    #[error("amplitudes violate normalization: {0}")]
    NormViolation(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{field}: {message}")]
    File { field: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
