//! Command drivers and file formats for the `subsetflow` binary.
//!
//! Everything here is plain functions from parsed arguments to output
//! strings so the formats can be tested without spawning processes; the
//! binary's `main` only parses flags, dispatches, and maps [`CliError`]
//! variants to exit codes.

use std::fmt;

pub mod commands;
pub mod format;
pub mod svg;

pub use commands::{cmd_bench, cmd_retract, cmd_trace, cmd_verify, BenchArgs, VerifyArgs};

/// Failures with a defined exit status: 2 for usage or parse errors, 3
/// for integrator divergence, 4 for unsupported rendering.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Divergence(String),
    Render(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Divergence(_) => 3,
            CliError::Render(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Divergence(m) => write!(f, "{m}"),
            CliError::Render(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<subsetflow::Error> for CliError {
    fn from(e: subsetflow::Error) -> Self {
        match e {
            subsetflow::Error::Divergence(steps) => CliError::Divergence(format!(
                "integration exceeded the step budget of {steps}"
            )),
            other => CliError::Usage(other.to_string()),
        }
    }
}
