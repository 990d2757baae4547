//! Configuration, dispatch and output for the `qedbloch` command.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;

use std::fmt;

pub use commands::{run, Command, Outcome};
pub use config::RunConfig;

/// Failures mapped onto the process exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or input; exit status 1.
    Config(String),
    /// Numerical failure or invariant violation; exit status 2.
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Failure(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Failure(m) => write!(f, "failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<qedbloch::Error> for CliError {
    fn from(e: qedbloch::Error) -> Self {
        match e {
            qedbloch::Error::Numeric { .. } => CliError::Failure(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(format!("i/o: {e}"))
    }
}
