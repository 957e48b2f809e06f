use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to decode {path}: {message}")]
    Decode { path: PathBuf, message: String },

    #[error("unsupported image format in {path}: {detail}")]
    UnsupportedFormat { path: PathBuf, detail: String },

    #[error("image has zero size ({width}x{height})")]
    EmptyImage { width: usize, height: usize },

    #[error("image is {width}x{height}, minimum is {min}x{min}")]
    TooSmall {
        width: usize,
        height: usize,
        min: usize,
    },

    #[error("pixel buffer has {found} values, expected {expected}")]
    BufferLength { expected: usize, found: usize },

    #[error("non-finite pixel at ({x}, {y})")]
    NonFinite { x: usize, y: usize },

    #[error("pixel {value} at ({x}, {y}) is outside [0, 1]")]
    OutOfRange { x: usize, y: usize, value: f64 },

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error(
        "inverse transform is not real: imaginary residue {residue:e} exceeds {limit:e} \
         (spectrum is not conjugate-symmetric)"
    )]
    Asymmetry { residue: f64, limit: f64 },

    #[error("at least one filter scale is required")]
    NoScales,

    #[error("manifest row {row}: {message}")]
    Manifest { row: usize, message: String },

    #[error("invalid value for `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("failed to parse config {path}: {message}")]
    ConfigParse { path: PathBuf, message: String },

    #[error("{0}")]
    Encode(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}
