use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: line {line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("invalid value for `{key}`: {msg}")]
    Validation { key: String, msg: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate geometry: transmitter and receiver coincide")]
    DegenerateGeometry,

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("amplifier saturated: requested {p_out} W exceeds maximum {p_max} W")]
    Saturation { p_out: f64, p_max: f64 },

    #[error("FFT size {0} is not a power of two >= 2")]
    NotPowerOfTwo(usize),

    #[error("total power must be positive, got {0}")]
    ZeroPower(f64),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid sweep specification: {0}")]
    Sweep(String),

    #[error("malformed results table: {0}")]
    Table(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn validation(key: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Validation {
            key: key.into(),
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
