//! Library side of the `mpfilter` command-line tool: job-configuration
//! parsing and the subcommand implementations. The binary in `main.rs` is a
//! thin argument-parsing shell around [`commands`].

pub mod commands;
pub mod config;

use thiserror::Error;

/// CLI failure classes, mapped onto exit codes by the binary: configuration
/// and schema problems exit 2, computation and data problems exit 3.
/// Diagnostics go to stderr; stdout carries only data.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Compute(_) => 3,
        }
    }
}
