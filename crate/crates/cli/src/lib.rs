//! Batch front-end for `corrmimo-core`: JSON experiment configs, figure
//! reproduction sweeps, a fast self-test and plot-ready CSV output.

// Negated comparisons such as `!(x > 0.0)` are used on purpose to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod csv;
pub mod experiments;
pub mod parallel;
pub mod selftest;

use std::fmt;

/// Failure classes with their process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad input; the message names the offending field.
    Config(String),
    /// A numerical routine failed or did not converge in strict mode.
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "invalid config: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<corrmimo_core::Error> for CliError {
    fn from(e: corrmimo_core::Error) -> Self {
        CliError::Numerical(e.to_string())
    }
}
