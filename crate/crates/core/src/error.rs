use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("row {row}: expected {expected} columns, found {found}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("row {row}, column {column} ('{name}'): cannot parse '{value}' as a real number")]
    Parse {
        row: usize,
        column: usize,
        name: String,
        value: String,
    },

    #[error("row {row}, column {column} ('{name}'): non-finite value '{value}'")]
    NonFinite {
        row: usize,
        column: usize,
        name: String,
        value: String,
    },

    #[error("label column '{0}' not found in header")]
    MissingLabel(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("expression parse error at byte {offset}: {message}")]
    Expression { offset: usize, message: String },

    #[error("model references feature X{index} but the dataset has only {d} features")]
    FeatureOutOfRange { index: usize, d: usize },

    #[error("invalid model file: {0}")]
    Model(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by input data rather than invocation.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::Config(_))
    }
}
