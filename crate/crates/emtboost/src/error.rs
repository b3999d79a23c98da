//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or configuration value is outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An operation was called outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The series evaluator would need more terms than it is willing to walk.
    #[error("series capacity exceeded: {0}")]
    SeriesCapacity(String),

    /// The data cannot seed the fitting procedure (e.g. all losses are zero).
    #[error("initialization error: {0}")]
    Initialization(String),

    /// A univariate search failed to produce a finite result.
    #[error("optimization error: {0}")]
    Optimization(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}
