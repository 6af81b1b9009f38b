use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("integer overflow while {0}")]
    Overflow(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("enumeration budget exceeded: {points} points requested, limit is {limit}")]
    BudgetExceeded { points: u128, limit: u128 },

    #[error("cannot summarise an empty set of runs")]
    EmptyInput,

    #[error("invariant violated after {evaluations} evaluations ({lemma}): {detail}")]
    InvariantViolation {
        lemma: &'static str,
        evaluations: u64,
        detail: String,
    },

    #[error("sampler exceeded {0} rejection rounds")]
    SamplerStuck(u32),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Schema { path: PathBuf, message: String },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[cfg(feature = "parallel")]
    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
