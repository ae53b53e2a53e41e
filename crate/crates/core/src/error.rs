use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Where in an input a format error was detected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Byte(u64),
    Line(usize),
    LineColumn(usize, usize),
    Query(usize),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Byte(offset) => write!(f, "byte {offset}"),
            Location::Line(line) => write!(f, "line {line}"),
            Location::LineColumn(line, col) => write!(f, "line {line}, column {col}"),
            Location::Query(q) => write!(f, "query {q}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// The caller violated a precondition (bad argument, mismatched shapes, ...).
    #[error("{0}")]
    Usage(String),
    /// Malformed input data.
    #[error("format error at {at}: {message}")]
    Format { at: Location, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn usage(message: impl Into<String>) -> Self {
        Error::Usage(message.into())
    }

    pub(crate) fn format(at: Location, message: impl Into<String>) -> Self {
        Error::Format {
            at,
            message: message.into(),
        }
    }
}
