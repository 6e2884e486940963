use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed PFM header: {0}")]
    MalformedHeader(String),

    #[error("invalid radiance {value} at texel (row {row}, col {col})")]
    InvalidTexel { row: usize, col: usize, value: f64 },

    #[error("equirectangular map must satisfy width = 2 * height, got {width}x{height}")]
    DimensionMismatch { width: usize, height: usize },

    #[error("texel index (row {row}, col {col}) outside {width}x{height} grid")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        width: usize,
        height: usize,
    },

    #[error("timestamp {0} outside the supported ephemeris era 1990-2050")]
    OutOfEra(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("could not parse {what}: {input}")]
    Parse { what: &'static str, input: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
