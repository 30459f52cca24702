use thiserror::Error;

use crate::scaling::Backend;

/// Errors raised by estimation, generation, and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {what} (got {value})")]
    Domain { what: &'static str, value: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("duplicate joint point: sample {index} has a zero k-th neighbor distance")]
    DuplicatePoint { index: usize },

    #[error("non-finite normalization factor from {backend} backend (ln V = {ln_v})")]
    NonFiniteNormalization { backend: Backend, ln_v: f64 },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Process exit code for the CLI: 1 configuration, 2 I/O, 3 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain { .. } | Error::Config(_) | Error::DuplicatePoint { .. } => 1,
            Error::Io(_) => 2,
            Error::Csv(e) if e.is_io_error() => 2,
            Error::Csv(_) => 1,
            Error::NonFiniteNormalization { .. } | Error::Invariant(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
