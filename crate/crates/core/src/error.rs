use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid arm parameters: {0}")]
    InvalidParams(String),

    #[error("invalid force profile: {0}")]
    InvalidProfile(String),

    #[error("unknown {kind} `{name}` (registered: {known})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        known: String,
    },

    #[error("integration failed at t = {t:.6} s: step {step:.3e} s cannot meet tolerance")]
    Integration { t: f64, step: f64 },

    #[error("target ({x:.4}, {y:.4}) is outside the reachable annulus [{inner:.4}, {outer:.4}]")]
    Unreachable { x: f64, y: f64, inner: f64, outer: f64 },

    #[error("time {t} outside reference domain [0, {duration}]")]
    Domain { t: f64, duration: f64 },

    #[error("degenerate speed series: {0}")]
    DegenerateSeries(String),

    #[error("empty group: {0}")]
    EmptyGroup(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: row {row}: {msg}")]
    Malformed { path: PathBuf, row: usize, msg: String },

    #[error("no movements in {0}")]
    NoMovements(PathBuf),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
