use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integer overflow while {0}")]
    Overflow(String),

    #[error("numerical instability: {0}")]
    NumericalInstability(String),

    #[error("dimension mismatch: expected d = {expected}, got d = {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("eigen-solver failure on {rows}x{rows} matrix: {detail}")]
    EigenFailure { rows: usize, detail: String },

    #[error("eta table range: {0}")]
    TableRange(String),

    #[error("non-integrable density power: {0}")]
    NonIntegrable(String),

    #[error("invalid collision model: {0}")]
    InvalidModel(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
