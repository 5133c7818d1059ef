//! Configuration parsing and output serialization for the `hydrotrack` CLI.

pub mod config;
pub mod output;

use std::fmt;

use hydrotrack_core::sim::SimError;

/// CLI-level errors, each mapped to a distinct exit code by `main`.
#[derive(Debug)]
pub enum CliError {
    /// Malformed configuration document (exit 3).
    Parse(String),
    /// Well-formed but invalid configuration (exit 4); names the field.
    Validation { field: String, message: String },
    /// Experiment failure from the simulation layer (exit 5).
    Run(SimError),
    /// Filesystem failure (exit 6).
    Io(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(msg) => write!(f, "config parse error: {msg}"),
            CliError::Validation { field, message } => {
                write!(f, "invalid config field `{field}`: {message}")
            }
            CliError::Run(e) => write!(f, "run failed: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 3,
            CliError::Validation { .. } => 4,
            CliError::Run(_) => 5,
            CliError::Io(_) => 6,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Run(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// True when the `HYDROTRACK_LOG` environment variable asks for verbose
/// progress notes on stderr. Logging only; never changes behavior.
pub fn verbose_logging() -> bool {
    std::env::var("HYDROTRACK_LOG")
        .map(|v| !v.is_empty() && v != "0")
        .unwrap_or(false)
}
