//! `cvmem run` scenario runner: regenerates the write, emission and readout
//! curves and the consistency checks as CSV and JSON files.

pub mod config;
pub mod output;
pub mod scenarios;

use thiserror::Error;

pub use config::{Overrides, RunSettings, Scenario, ScenarioConfig};
pub use scenarios::{run, Outcome};

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input or an unusable output location.
    #[error("{0}")]
    Validation(String),
    /// A computed check missed its tolerance or the integrator gave up.
    #[error("{0}")]
    Tolerance(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Tolerance(_) => 3,
        }
    }
}

impl From<cvmem_core::Error> for CliError {
    fn from(e: cvmem_core::Error) -> Self {
        use cvmem_core::Error as E;
        match e {
            E::ToleranceNotMet { .. } | E::Stiffness { .. } => CliError::Tolerance(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}
