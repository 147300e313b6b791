use thiserror::Error;

use crate::algebra::GroupSpec;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("grid resolution {resolution} cannot resolve cutoff {cutoff} (need at least {required})")]
    ResolutionTooSmall {
        resolution: usize,
        cutoff: usize,
        required: usize,
    },

    #[error("operation requires gauge group U(1), got {0}")]
    NotAbelian(GroupSpec),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite values encountered at t = {t}")]
    NonFinite { t: f64 },

    #[error("step size underflow at t = {t} (dt = {dt})")]
    StepUnderflow { t: f64, dt: f64 },

    #[error("invalid loop: {0}")]
    InvalidLoop(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("field checkpoint: {0}")]
    Format(String),

    #[error("config hash mismatch: expected {expected}, found {found}")]
    HashMismatch { expected: String, found: String },

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
