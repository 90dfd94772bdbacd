use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by corpus ingestion and the model pipelines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Ingest {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{0}")]
    Domain(String),

    #[error("unknown word `{0}`")]
    UnknownWord(String),

    #[error("`{word}` is below the frequency threshold in period `{period}`")]
    BelowThreshold { word: String, period: String },

    #[error("insufficient advection history for `{word}`: {usable} usable point(s), need at least 2")]
    InsufficientHistory { word: String, usable: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
