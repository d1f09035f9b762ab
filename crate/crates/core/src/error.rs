use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UewError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("not a density matrix: {0}")]
    NotADensityMatrix(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension {0} exceeds the supported limit")]
    DimensionTooLarge(usize),

    #[error("no feasible product state on the requested side of the constraint")]
    EmptyFeasibleSet,

    #[error("standing assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("inconsistent bisection bracket: {0}")]
    InconsistentBracket(String),

    #[error("optimizer did not converge: {0}")]
    NoConvergence(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, UewError>;

impl From<std::io::Error> for UewError {
    fn from(e: std::io::Error) -> Self {
        UewError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for UewError {
    fn from(e: serde_json::Error) -> Self {
        UewError::Parse(e.to_string())
    }
}
