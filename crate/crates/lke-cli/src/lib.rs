//! Library side of the `lke` binary: configuration, the five run modes and
//! their CSV/metadata artifacts.

mod commands;
pub mod config;
mod output;

pub use commands::{run, RunReport};
pub use config::{Mode, ObservableName, RunConfig};

use lke_core::Error as CoreError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_FEASIBILITY: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("cannot write {path}: {msg}")]
    Output { path: String, msg: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Output { .. } => EXIT_CONFIG,
            CliError::Core(e) => match e {
                CoreError::InvalidParameter(_)
                | CoreError::UnsupportedScheme(_)
                | CoreError::MissingOperator(_)
                | CoreError::GridMismatch(_) => EXIT_CONFIG,
                CoreError::Infeasible(_) => EXIT_FEASIBILITY,
                CoreError::BlowUp { .. } | CoreError::Numerical(_) | CoreError::OutOfRange { .. } => EXIT_NUMERICAL,
            },
        }
    }
}
