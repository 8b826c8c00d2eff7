use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid grid construction (odd resolution, unsupported dimension, ...).
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// A parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// Two fields or trajectories do not live on the same grid / time mesh.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A field or derived quantity contains NaN or Inf.
    #[error("non-finite data: {0}")]
    NonFinite(String),

    /// A ball family or Littlewood-Paley bank has nothing to scan.
    #[error("empty scan family: {0}")]
    EmptyFamily(String),

    /// Malformed run manifest or configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Malformed or inconsistent snapshot file.
    #[error("snapshot error: {0}")]
    Snapshot(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
