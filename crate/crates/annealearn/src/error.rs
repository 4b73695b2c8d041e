//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller passed an argument outside the documented domain.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// An input violated a numerical contract (e.g. a matrix that must be
    /// Hermitian or unit-trace was not).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A requested exponential would leave the representable range of f64.
    #[error("exponent overflow{}: |exponent| = {exponent:.6e} exceeds {limit}",
            step.map(|k| format!(" at step {k}")).unwrap_or_default())]
    Overflow {
        /// Forward step at which the overflow was detected, when known.
        step: Option<usize>,
        /// The offending exponent magnitude.
        exponent: f64,
        /// The limit that was exceeded.
        limit: f64,
    },

    /// Training produced a non-finite loss or gradient.
    #[error("training diverged at epoch {epoch}: {detail}")]
    Diverged { epoch: usize, detail: String },

    /// A monotone schedule collapsed to zero range.
    #[error("degenerate schedule: {0}")]
    DegenerateSchedule(String),

    /// Experiment configuration failed validation; all violations are listed.
    #[error("invalid config:\n  {}", .0.join("\n  "))]
    InvalidConfig(Vec<String>),

    /// A noise sample had to be rejected (and could not be redrawn).
    #[error("rejected noise sample: {0}")]
    RejectedSample(String),

    /// An I/O operation failed; `context` names the file or directory.
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    /// A persisted file could not be parsed back.
    #[error("parse error in {file}: {detail}")]
    Parse { file: String, detail: String },
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { context: context.into(), source }
    }

    /// Process exit code used by the CLI for this error class.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::InvalidConfig(_) | Error::Argument(_) => 2,
            Error::Diverged { .. } => 3,
            Error::Io { .. } | Error::Parse { .. } => 4,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
