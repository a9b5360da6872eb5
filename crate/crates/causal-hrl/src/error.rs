//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("graph size mismatch: {0} vs {1}")]
    GraphSizeMismatch(usize, usize),

    #[error("graph is cyclic")]
    CyclicGraph,

    #[error("graph with {0} nodes exceeds the brute-force cap of {1}")]
    GraphTooLarge(usize, usize),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("missing artifact: {0}")]
    MissingArtifact(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
