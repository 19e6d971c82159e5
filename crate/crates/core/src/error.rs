use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("corpus has {0} distinct class(es); at least 2 are required")]
    TooFewClasses(usize),

    #[error("invalid fold configuration: {0}")]
    InvalidFolds(String),

    #[error("index {index} out of range (len {len})")]
    OutOfRange { index: usize, len: usize },

    #[error("no terms survive min_df={0}")]
    EmptyVocabulary(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("SVD did not converge after {iterations} iterations (max relative change {max_change:e}, max residual {max_residual:e})")]
    NoConvergence {
        iterations: usize,
        max_change: f64,
        max_residual: f64,
    },

    #[error("DVEC format error: {0}")]
    Format(String),

    #[error("degenerate labels: training needs at least 2 distinct classes")]
    DegenerateLabels,

    #[error("sidecar error: {message}")]
    Sidecar { message: String, log: String },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
