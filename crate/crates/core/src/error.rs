use std::io;

use thiserror::Error;

/// Errors raised by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A request that would exceed a configured resource ceiling.
    #[error("resource limit: {0}")]
    Resource(String),

    /// Observations fed out of order.
    #[error("ordering error: {0}")]
    Ordering(String),

    /// A gamma component with non-positive shape or rate.
    #[error("improper posterior: {0}")]
    Improper(String),

    /// Two objects that must agree do not.
    #[error("consistency error: {0}")]
    Consistency(String),

    /// Malformed structured input.
    #[error("parse error{}: {msg}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse { line: Option<usize>, msg: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(line: Option<usize>, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    /// Process exit code for the CLI: 3 for I/O failures, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
