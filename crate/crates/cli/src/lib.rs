//! Library side of the command-line tool: instance schema, output
//! records, and subcommand implementations. The binary in `main.rs` is a
//! thin argument-parsing wrapper around these.

pub mod commands;
pub mod instance;
pub mod records;

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Io(String),
}

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        CliError::Invalid(message.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Invalid(m) => write!(f, "invalid input: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<eqcoupling::Error> for CliError {
    fn from(e: eqcoupling::Error) -> Self {
        CliError::Invalid(e.to_string())
    }
}
