//! Experiment harness: seeded instance generation, λ continuation, the
//! convergence and success-rate benchmarks, the two-scan T1 pipeline and the
//! CSV / PGM / manifest outputs behind the `nlsparse` command-line tool.

pub mod bench;
pub mod config;
pub mod continuation;
pub mod instances;
pub mod manifest;
pub mod output;
pub mod recover;
pub mod runner;
pub mod seeds;
pub mod t1;

use thiserror::Error;

pub use config::{Experiment, ExperimentSpec};
pub use manifest::RunManifest;
pub use runner::run_experiment;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] nlsparse::Error),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("could not parse {path}: {message}")]
    Parse { path: String, message: String },
}

impl HarnessError {
    /// Short machine-readable category name.
    pub fn kind(&self) -> &'static str {
        match self {
            HarnessError::Core(e) => e.kind(),
            HarnessError::Config(_) => "config",
            HarnessError::Io { .. } => "io",
            HarnessError::Csv(_) => "csv",
            HarnessError::Parse { .. } => "parse",
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
