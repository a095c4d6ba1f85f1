use std::path::PathBuf;

use thiserror::Error;

use crate::cogmodel::GraphError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("state {value} lies outside [0, 1]")]
    Domain { value: f64 },

    #[error("numerical divergence at step {step}")]
    Divergence { step: usize },

    #[error("replicator clamp of {magnitude:e} at step {step} exceeds 1e-9; reduce dt")]
    ClampExceeded { step: usize, magnitude: f64 },

    #[error("state failed to settle at lambda = {lambda} (|rate| = {rate:e})")]
    NotEquilibrated { lambda: f64, rate: f64 },

    #[error("attachment weight is zero for both camps")]
    ZeroAttachment,

    #[error("agent {0} has no interaction neighbors")]
    IsolatedAgent(usize),

    #[error("topology: {0}")]
    Topology(String),

    #[error(transparent)]
    Graph(#[from] GraphError),

    #[error("config parse error at line {line}, column {column}: {message}")]
    ConfigParse { line: usize, column: usize, message: String },

    #[error("config field `{field}`: {message}")]
    ConfigField { field: String, message: String },

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("empty input: {0}")]
    Empty(&'static str),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// Malformed or invalid configuration, as opposed to a failure while
    /// running a valid one.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::ConfigParse { .. } | Error::ConfigField { .. })
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
