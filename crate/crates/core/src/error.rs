use std::path::PathBuf;

use thiserror::Error;

use crate::activity::Activity;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("user {user}: channel {channel} contains no finite value")]
    EmptyChannel { user: u8, channel: String },
    #[error("cannot resample {from} Hz to {to} Hz: {reason}")]
    Resample { from: f64, to: f64, reason: String },
    #[error("unknown user id {0}")]
    UnknownUser(u8),
    #[error("activity {0} is required by the reference distribution but has no windows")]
    MissingActivity(Activity),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("k = {k} is out of range for a model with {instances} instances")]
    InvalidK { k: usize, instances: usize },
    #[error("no instances: {0}")]
    NoInstances(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("constant metric: total variance is zero")]
    ConstantMetric,
    #[error("constant input: correlation undefined")]
    ConstantInput,
    #[error("incomplete grid: {0}")]
    IncompleteGrid(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
