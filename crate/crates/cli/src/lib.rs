//! Experiment harness for the `commgp` library: synthetic dataset
//! generation, CSV ingestion, experiment drivers, and deterministic report
//! writers, exposed through the `commgp` binary.

pub mod config;
pub mod dataset;
pub mod experiments;
pub mod report;

/// Harness-level errors, split by exit code: config problems exit 2,
/// numerical failures exit 3, I/O failures exit 1.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Math(#[from] commgp::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 1,
            CliError::Math(_) => 3,
        }
    }
}
