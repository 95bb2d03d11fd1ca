use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid cost matrix: {0}")]
    InvalidCost(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("exact solver exceeded {0} pivots without terminating")]
    SolverStall(usize),
    #[error("chain not ready: {0}")]
    ChainNotReady(String),
    #[error("out-of-order residual update: expected half-step {expected}, got {got}")]
    OutOfOrder { expected: u64, got: u64 },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
