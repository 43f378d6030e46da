use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid dimension {dim}: {reason}")]
    InvalidDimension { dim: usize, reason: &'static str },

    #[error("insufficient points: requested {requested}, only {available} eligible")]
    InsufficientPoints { requested: usize, available: usize },

    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("empty curve: no points in the estimation window")]
    EmptyCurve,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
