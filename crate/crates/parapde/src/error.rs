use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("aliasing: product band {need} exceeds padded band {have}")]
    AliasHeadroom { need: usize, have: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("fixture mismatch: {0}")]
    FixtureMismatch(String),

    #[error("solver did not converge: {0}")]
    NonConvergence(String),

    #[error("solution exploded at t = {time}: sup-norm {sup_norm}")]
    Explosion { time: f64, sup_norm: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
