use thiserror::Error;

/// Where in an input a format problem was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    /// Zero-based byte offset into a binary payload.
    Byte(u64),
    /// One-based line number in a text file.
    Line(usize),
}

impl std::fmt::Display for Location {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Location::Byte(b) => write!(f, "byte {b}"),
            Location::Line(l) => write!(f, "line {l}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:e} below tolerance {bound:e})")]
    NotPsd { eigenvalue: f64, bound: f64 },

    #[error("insufficient data: need at least {needed} rows, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("category {0:?} has no rows")]
    EmptyCategory(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("format error at {location}: {message}")]
    Format { location: Location, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn at_byte(offset: u64, msg: impl Into<String>) -> Self {
        Error::Format { location: Location::Byte(offset), message: msg.into() }
    }

    pub(crate) fn at_line(line: usize, msg: impl Into<String>) -> Self {
        Error::Format { location: Location::Line(line), message: msg.into() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
