//! End-to-end experiment runs: compute, write outputs, write the manifest.

use std::path::{Path, PathBuf};

use crate::bench::{resolve_lambdas, run_convergence, run_success_rate};
use crate::config::{Experiment, ExperimentSpec};
use crate::manifest::{unix_now, RunManifest};
use crate::output::{ensure_dir, write_convergence_csv, write_csv, write_t1_outputs};
use crate::t1::run_t1_pipeline;
use crate::{HarnessError, Result};

pub const MANIFEST_FILE: &str = "manifest.toml";

/// Runs `spec.experiment` and writes its outputs and `manifest.toml` into
/// `spec.out_dir`. Output files depend only on the specification, so rerunning
/// a manifest reproduces them byte for byte.
pub fn run_experiment(mut spec: ExperimentSpec) -> Result<RunManifest> {
    spec.validate()?;
    let started = unix_now();
    let dir = PathBuf::from(&spec.out_dir);
    ensure_dir(&dir)?;
    let (seeds, mut outputs) = match spec.experiment {
        Experiment::Convergence => {
            let report = run_convergence(&spec)?;
            write_convergence_csv(&dir.join("convergence.csv"), &report)?;
            (report.seeds, vec!["convergence.csv".to_string()])
        }
        Experiment::SuccessRate => {
            let mut seeds = resolve_lambdas(&mut spec)?;
            let report = run_success_rate(&spec)?;
            write_csv(&dir.join("success.csv"), &report.rows)?;
            seeds.extend(report.seeds);
            (seeds, vec!["success.csv".to_string()])
        }
        Experiment::T1Pipeline => {
            let report = run_t1_pipeline(&spec)?;
            let outputs = write_t1_outputs(&dir, &report)?;
            (report.seeds, outputs)
        }
        Experiment::Recover => {
            return Err(HarnessError::Config(
                "recover runs on data files; use the `recover` subcommand".into(),
            ))
        }
    };
    outputs.push(MANIFEST_FILE.to_string());
    let mut manifest = RunManifest::new(spec, started);
    manifest.trial_seeds = seeds;
    manifest.run.outputs = outputs;
    manifest.run.finished_unix = unix_now();
    manifest.write(&dir.join(MANIFEST_FILE))?;
    Ok(manifest)
}

/// Path of an output file of a finished run.
pub fn output_path(manifest: &RunManifest, name: &str) -> PathBuf {
    Path::new(&manifest.spec.out_dir).join(name)
}
