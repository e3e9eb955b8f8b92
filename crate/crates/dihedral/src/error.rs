use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("flip must be +1 or -1, got {0}")]
    InvalidFlip(i64),
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("weights sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("empty support")]
    EmptySupport,
    #[error("condition (a) fails: second-moment matrix is singular (det = {det})")]
    ConditionA { det: f64 },
    #[error("condition (b) fails: {reason}")]
    ConditionB { reason: String },
    #[error("covariance matrix is singular")]
    SingularCovariance,
    #[error("theta is not in T_d")]
    NotInTd,
    #[error("no return to the identity within {0} steps")]
    NoReturn(usize),
    #[error("path contains no flip step")]
    NoFlip,
    #[error("eigenvalue tie at top modulus ({0:e} apart)")]
    EigenTie(f64),
    #[error("perturbation solve did not converge (residual {0:e})")]
    Perturbation(f64),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
