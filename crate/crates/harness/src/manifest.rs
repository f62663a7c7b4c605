//! Run manifests: the resolved specification plus provenance, written as TOML.
//!
//! Feeding a manifest back through `--config` reproduces the run exactly,
//! since every selected λ and the master seed are part of the specification.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::config::ExperimentSpec;
use crate::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialSeed {
    pub label: String,
    pub seed: u64,
}

impl TrialSeed {
    pub fn new(label: impl Into<String>, seed: u64) -> Self {
        TrialSeed {
            label: label.into(),
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunInfo {
    pub tool: String,
    pub version: String,
    pub core_version: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    #[serde(flatten)]
    pub spec: ExperimentSpec,
    pub run: RunInfo,
    pub trial_seeds: Vec<TrialSeed>,
}

pub fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

impl RunManifest {
    pub fn new(spec: ExperimentSpec, started_unix: u64) -> Self {
        RunManifest {
            spec,
            run: RunInfo {
                tool: env!("CARGO_PKG_NAME").into(),
                version: env!("CARGO_PKG_VERSION").into(),
                core_version: nlsparse::VERSION.into(),
                started_unix,
                finished_unix: started_unix,
                outputs: Vec::new(),
            },
            trial_seeds: Vec::new(),
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| HarnessError::Config(format!("manifest: {e}")))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?).map_err(|e| HarnessError::io(path, e))
    }
}
