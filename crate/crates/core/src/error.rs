use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum MtsError {
    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("ingestion error at row {row}, column {column}: {message}")]
    Ingestion { row: usize, column: usize, message: String },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl MtsError {
    /// Stable machine-readable tag for the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            MtsError::Configuration(_) => "configuration",
            MtsError::Shape(_) => "shape",
            MtsError::Input(_) => "input",
            MtsError::Ingestion { .. } => "ingestion",
            MtsError::DegenerateInput(_) => "degenerate_input",
            MtsError::Precondition(_) => "precondition",
            MtsError::Io { .. } => "io",
            MtsError::Serialization(_) => "serialization",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        MtsError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = MtsError> = std::result::Result<T, E>;
