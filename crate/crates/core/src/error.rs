use thiserror::Error;

use crate::geometry::Side;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("coordinate {value} on axis {axis} outside [0, {extent})")]
    OutOfRange { axis: usize, value: i64, extent: i64 },

    #[error("point not present in {0}")]
    Absent(Side),

    #[error("key {0} already present")]
    DuplicateKey(u64),

    #[error("key {0} not present")]
    MissingKey(u64),

    #[error("cannot sample: total weight is zero")]
    ZeroWeight,

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("malformed data at {location}: {reason}")]
    Malformed { location: String, reason: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
