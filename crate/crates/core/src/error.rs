use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} components, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("input component {index} = {value} is outside [0, 1]")]
    InputOutOfRange { index: usize, value: f64 },

    #[error("neuron index {index} out of range for a grid of {size} neurons")]
    InvalidNeuron { index: usize, size: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("world file line {line}: {message}")]
    WorldParse { line: usize, message: String },

    #[error("invalid world: {0}")]
    InvalidWorld(String),

    #[error("path is {available:.3} m long but {requested:.3} m were requested")]
    PathTooShort { available: f64, requested: f64 },

    #[error("unknown world {0:?}")]
    UnknownWorld(String),

    #[error("invalid experiment plan: {0}")]
    InvalidPlan(String),

    #[error("unsupported snapshot version {found} (expected {expected})")]
    SnapshotVersion { found: u32, expected: u32 },

    #[error("malformed snapshot: {0}")]
    SnapshotFormat(String),

    #[error("malformed trace: {0}")]
    TraceFormat(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, action: &str, source: std::io::Error) -> Self {
        let path = path.into();
        Error::Io {
            context: format!("failed to {action} {}", path.display()),
            source,
        }
    }
}

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}
