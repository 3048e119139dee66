use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite state encountered at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("trajectory diverged at t = {t}: |x| = {norm:e} exceeds {bound:e}")]
    Diverged { t: f64, norm: f64, bound: f64 },

    #[error("sample interval {dt} is not an integer multiple of the step {h}")]
    GridMismatch { dt: f64, h: f64 },

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("input {value} on channel {channel} is outside the open interval (-{beta}, {beta})")]
    OutOfRange {
        channel: usize,
        value: f64,
        beta: f64,
    },

    #[error(
        "regression matrix is rank deficient: numerical rank {rank} < {cols} columns \
         (collect more samples, M >> L_V + m*L_u, or use a richer exploration signal)"
    )]
    RankDeficient { rank: usize, cols: usize },

    #[error("matrix is not Hurwitz: eigenvalue with real part {max_real:e}")]
    NotHurwitz { max_real: f64 },

    #[error("gain does not stabilize the plant: {0}")]
    NotStabilizing(String),

    #[error("iteration limit {0} reached without convergence")]
    MaxIter(usize),

    #[error("unknown case '{0}'")]
    UnknownCase(String),

    #[error("invalid basis definition: {0}")]
    InvalidBasis(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed data in {path}: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            msg: msg.into(),
        }
    }
}
