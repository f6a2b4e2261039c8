use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "inverse-gamma fit did not converge after {iterations} iterations (residuals {residual_lo:e}, {residual_hi:e})"
    )]
    PriorFit { iterations: usize, residual_lo: f64, residual_hi: f64 },

    #[error("non-finite value in {tensor} at step {step}")]
    NonFinite { step: usize, tensor: String },

    #[error("cholesky factorisation failed even with jitter {jitter:e}")]
    Cholesky { jitter: f64 },

    #[error("unknown benchmark '{name}' (available: {available})")]
    UnknownBenchmark { name: String, available: String },

    #[error("checkpoint error in segment '{segment}': {reason}")]
    CheckpointSegment { segment: String, reason: String },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("training diverged at step {step}: {reason}")]
    Diverged { step: usize, reason: String, last_good: Box<crate::io::checkpoint::Checkpoint> },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
