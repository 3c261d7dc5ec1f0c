use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input that breaks a type invariant (bad digit, ratios not summing to 1, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Malformed text input, with a 1-based position.
    #[error("{line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// An operation was called outside its domain (wrong dimension, zero delta, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A level-n structure would exceed the configured cell cap.
    #[error("resource limit: {needed} cells exceed the cap of {cap}")]
    ResourceExhausted { needed: u128, cap: u64 },

    /// A proven property failed to hold; always a bug.
    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invariant(_) => 2,
            _ => 1,
        }
    }
}
