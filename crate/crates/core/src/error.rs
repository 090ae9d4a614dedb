use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("random layout stayed disconnected after {attempts} attempts")]
    TopologyGeneration { attempts: usize },

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("graph with {nodes} node(s) has no cut")]
    NoCut { nodes: usize },

    #[error("graph is disconnected; a global minimum cut is undefined")]
    Disconnected,

    #[error("brute-force enumeration refused: {nodes} nodes exceeds cap of {cap}")]
    TooLarge { nodes: usize, cap: usize },

    #[error("expected {expected} bits, got {got}")]
    BitCount { expected: usize, got: usize },

    #[error("expected {expected} baseband samples, got {got}")]
    SampleLength { expected: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("model shapes do not match")]
    ShapeMismatch,

    #[error("{0} must not be empty")]
    Empty(&'static str),

    #[error("invalid value for `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("summary invariant violated: {0}")]
    SummaryInvariant(String),

    #[error("unknown output format `{0}`")]
    UnknownFormat(String),

    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
