use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("{0}")]
    Empty(&'static str),

    #[error("non-finite coordinate or value: {0}")]
    NonFinite(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("missing column '{0}'")]
    MissingColumn(String),

    #[error("column '{0}' already exists (use overwrite to replace it)")]
    ColumnExists(String),

    #[error("column '{column}' has the wrong type: expected {expected}")]
    ColumnType {
        column: String,
        expected: &'static str,
    },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("no reclassification entry matches value {0}")]
    Unmatched(String),

    #[error("need at least {needed} distinct values, found {found}")]
    TooFewDistinct { needed: usize, found: usize },

    #[error("invalid comparison matrix: {0}")]
    Matrix(String),

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("no consistent matrix (CR < 0.1) found for n = {n} within {draws} draws; try a smaller n")]
    RejectionCap { n: usize, draws: usize },

    #[error("format error in {context}: {message}")]
    Format { context: String, message: String },

    #[error("invalid model:\n  - {}", .0.join("\n  - "))]
    Model(Vec<String>),

    #[error("criterion '{criterion}' failed during {stage}: {source}")]
    Stage {
        criterion: String,
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn format(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Format {
            context: context.into(),
            message: message.into(),
        }
    }
}
