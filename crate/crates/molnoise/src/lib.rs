//! Experiment harness for `molnoise-core`: unit-carrying configs, parallel
//! Monte Carlo ensembles, preset experiments and CSV output.

pub mod config;
pub mod ensemble;
pub mod experiment;
pub mod presets;
pub mod units;

use std::io;

use thiserror::Error;

pub use config::{ExperimentConfig, ValidationReport};
pub use experiment::{run_experiment, Outputs};

/// Harness errors, grouped into the categories reported by the exit code.
#[derive(Debug, Error)]
pub enum Error {
    /// The config file could not be parsed.
    #[error("config error: {0}")]
    Config(String),
    /// The config parsed but violates one or more invariants.
    #[error("invalid config:\n{0}")]
    Validation(ValidationReport),
    /// A model or simulation routine failed.
    #[error("numerical error: {0}")]
    Numerical(#[from] molnoise_core::Error),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("{0}")]
    Other(String),
}

impl Error {
    /// Process exit code: 2 for config problems, 3 for numerical failures,
    /// 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Validation(_) => 2,
            Error::Numerical(_) => 3,
            Error::Io(_) | Error::Other(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
