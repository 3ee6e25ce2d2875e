use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("dimension error: {0}")]
    DimensionError(String),

    #[error("cap exceeded: p = {p} is above the configured cap {cap}")]
    CapExceeded { p: usize, cap: usize },

    #[error("not a crossing: {0}")]
    NotACrossing(String),

    #[error("degenerate profile: {0}")]
    DegenerateProfile(String),

    #[error("out of window: parameter {value} outside [{lo}, {hi}]")]
    OutOfWindow { value: f64, lo: f64, hi: f64 },

    #[error("transpose required: {0}")]
    TransposeRequired(String),

    #[error("power iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
