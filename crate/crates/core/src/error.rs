use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("I/O error on {path}: {source}")]
    IoPath {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("{path}: image is {width}x{height}, expected {expected}x{expected}")]
    Dimensions {
        path: PathBuf,
        width: u32,
        height: u32,
        expected: u32,
    },

    #[error("layout error: {0}")]
    Layout(String),

    #[error("blank glyph: {0}")]
    BlankGlyph(String),

    #[error("quota error: class {class} needs {needed} samples but only {available} are available")]
    Quota {
        class: String,
        needed: usize,
        available: usize,
    },

    #[error("partition error: {0}")]
    Partition(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("dataset mismatch: {0}")]
    Mismatch(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("network error: {0}")]
    Network(String),
}

impl Error {
    pub fn io_at(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::IoPath {
            path: path.into(),
            source,
        }
    }
}
