use std::fmt;

use thiserror::Error;

/// Everything that can go wrong in the library, grouped by class so the CLI
/// can map each class onto its own exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("parse error at {0}: {1}")]
    Parse(Location, String),

    #[error("invalid epsilon {0}: must lie in [0, 1]")]
    InvalidEpsilon(f64),

    #[error("invalid id: {0}")]
    InvalidId(String),

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("inconsistent boundary: check type {check_type} shift {shift} has a nonzero sum over fixed bits")]
    InconsistentBoundary { check_type: usize, shift: i64 },

    #[error("insufficient points: {0}")]
    InsufficientPoints(String),

    #[error("level {0} is not bracketed by the report")]
    NotBracketed(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for this error class. Zero is reserved for success.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameters(_) => 2,
            Error::Parse(..) => 3,
            Error::InvalidEpsilon(_) => 4,
            Error::InvalidId(_) => 5,
            Error::ResourceLimit(_) => 6,
            Error::BudgetExceeded(_) => 7,
            Error::InconsistentBoundary { .. } => 8,
            Error::InsufficientPoints(_) => 9,
            Error::NotBracketed(_) => 10,
            Error::Io(_) => 11,
        }
    }
}

/// 1-based line/column of a parse diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
