//! Command implementations behind the `ddq` binary.
//!
//! Every command returns its output as a string so the binary decides where
//! it goes. Floats in CSV output use `{:.16e}`, which makes identical
//! configurations produce byte-identical files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;

pub use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error(transparent)]
    Numerical(ddq::Error),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<ddq::Error> for CliError {
    fn from(e: ddq::Error) -> Self {
        use ddq::Error::*;
        match e {
            InvalidCircuit(_) | InvalidBath(_) | InvalidArgument(_) | DispersiveViolation { .. } | Domain { .. } => {
                CliError::Validation(e.to_string())
            }
            other => CliError::Numerical(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

pub(crate) fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}
