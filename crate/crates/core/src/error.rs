use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid dyadic interval: offset {offset} at level {level}")]
    InvalidInterval { level: u32, offset: u64 },

    #[error("invalid shape vector: {0}")]
    InvalidShape(String),

    #[error(
        "grid needs 2^{requested} cells, above the cap of 2^{cap}; use a sampled estimator instead"
    )]
    ResolutionCap { requested: u32, cap: u32 },

    #[error("unsupported dimension {dim}: {reason}")]
    UnsupportedDimension { dim: usize, reason: &'static str },

    #[error("precondition violated: {0}")]
    Domain(String),

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
