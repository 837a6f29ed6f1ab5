use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the projection pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("alignment error: phrase counts differ ({source_count} vs {target_count})")]
    Alignment {
        source_count: usize,
        target_count: usize,
    },

    #[error("unknown word: {0:?}")]
    UnknownWord(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape error: expected {expected}, got {actual}")]
    Shape { expected: usize, actual: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{} not found", .path.display())]
    NotFound { path: PathBuf },

    #[error("schema error: missing column {0:?}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
