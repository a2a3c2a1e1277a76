//! Experiment driver behind the `modeport` binary: configuration, the
//! subcommands and their CSV/JSON reports.

// NaN-rejecting range checks are written as negated comparisons.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;
pub mod selftest;

use std::fmt;

pub use commands::{sweep_row, Options, Output, ResultRow};
pub use config::{ExperimentConfig, ExperimentKind};
pub use output::{Format, Report, Table, Value};

/// Failures mapped onto the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// A computed result violates a checked invariant (exit 1).
    Failure(String),
    /// The configuration is missing, malformed or out of range (exit 2).
    Config(String),
    /// The runtime environment cannot support the run (exit 3).
    Environment(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Failure(_) => 1,
            Self::Config(_) => 2,
            Self::Environment(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Failure(m) => write!(f, "check failed: {m}"),
            Self::Config(m) => write!(f, "configuration error: {m}"),
            Self::Environment(m) => write!(f, "environment error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<modeport::Error> for CliError {
    fn from(e: modeport::Error) -> Self {
        match e {
            modeport::Error::Numerical(_) => Self::Failure(e.to_string()),
            _ => Self::Config(e.to_string()),
        }
    }
}
