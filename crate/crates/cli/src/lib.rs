//! Scenario-file driver for the `dispctl` binary: loading, parameter sweeps,
//! the four commands and their JSON/CSV artifacts.

pub mod commands;
pub mod config;
pub mod report;

use thiserror::Error;

pub use commands::{Command, RunOptions, run};
pub use config::{Sweep, load_scenario};

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_HYPOTHESIS: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] dispctl_core::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_hypothesis_violation() => EXIT_HYPOTHESIS,
            _ => EXIT_CONFIG,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
