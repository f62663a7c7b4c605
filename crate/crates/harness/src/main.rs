use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nlsparse::ModelKind;
use nlsparse_harness::config::{parse_splits, Experiment, ExperimentSpec};
use nlsparse_harness::continuation::SolverKind;
use nlsparse_harness::manifest::{unix_now, RunManifest};
use nlsparse_harness::output::{ensure_dir, write_t1_outputs};
use nlsparse_harness::recover::{read_matrix_csv, read_vector_csv, recover_vector, write_vector_csv};
use nlsparse_harness::runner::MANIFEST_FILE;
use nlsparse_harness::{run_experiment, HarnessError, Result};
use serde_json::json;

/// Sparse recovery from non-linear measurements: benchmarks, the two-scan
/// T1-mapping pipeline and one-shot recovery.
#[derive(Parser)]
#[command(name = "nlsparse", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-iteration objective of the baseline and proposed solvers.
    BenchConvergence(Common),
    /// Success rate versus sparsity for every measurement kind.
    BenchSuccess(Common),
    /// PD and T1 recovery over K-space budget splits.
    T1Pipeline(Common),
    /// Recover a signal from user-provided data files.
    Recover(RecoverArgs),
}

#[derive(Args)]
struct Common {
    /// TOML experiment specification (a previous manifest.toml works too).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Trials per sparsity level.
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated measurement kinds.
    #[arg(long, value_delimiter = ',')]
    kinds: Option<Vec<String>>,
    /// Comma-separated PD/T1 splits, e.g. `30/70,40/60`.
    #[arg(long)]
    splits: Option<String>,
}

impl Common {
    fn spec(&self, experiment: Experiment) -> Result<ExperimentSpec> {
        let mut spec = match &self.config {
            Some(path) => ExperimentSpec::load(path)?,
            None => ExperimentSpec::default(),
        };
        spec.experiment = experiment;
        if let Some(seed) = self.seed {
            spec.seed = seed;
        }
        if let Some(out) = &self.out {
            spec.out_dir = out.clone();
        }
        if let Some(trials) = self.trials {
            spec.benchmark.trials = trials;
        }
        if let Some(kinds) = &self.kinds {
            spec.benchmark.kinds = kinds.clone();
        }
        if let Some(splits) = &self.splits {
            spec.t1.splits = parse_splits(splits)?;
        }
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Args)]
struct RecoverArgs {
    /// Measurement kind: linear, exponential or logarithmic for matrix data.
    #[arg(long, default_value = "linear")]
    kind: String,
    /// Headerless CSV matrix A.
    #[arg(long, requires = "measurements", conflicts_with_all = ["pd_image", "t1_image"])]
    matrix: Option<PathBuf>,
    /// Headerless CSV measurement vector y.
    #[arg(long)]
    measurements: Option<PathBuf>,
    /// Analysis transform for matrix data: identity, haar or finite-difference.
    #[arg(long, default_value = "haar")]
    transform: String,
    /// Final λ relative to ‖Ψ∇‖∞ at the starting point.
    #[arg(long, default_value_t = 1e-5)]
    lambda_rel: f64,
    /// PD image (PGM) of a phantom to run the two-scan pipeline on.
    #[arg(long, requires = "t1_image")]
    pd_image: Option<PathBuf>,
    /// T1 image (PGM); intensity 1 maps to `--t1-max` milliseconds.
    #[arg(long, requires = "pd_image")]
    t1_image: Option<PathBuf>,
    /// T1 in ms of a full-intensity T1 pixel.
    #[arg(long, default_value_t = 2000.0)]
    t1_max: f64,
    #[command(flatten)]
    common: Common,
}

fn recover(args: &RecoverArgs) -> Result<serde_json::Value> {
    let mut spec = args.common.spec(Experiment::Recover)?;
    let dir = spec.out_dir.clone();
    ensure_dir(&dir)?;
    let started = unix_now();
    let mut manifest;
    if let (Some(pd), Some(t1)) = (&args.pd_image, &args.t1_image) {
        let maps = nlsparse::mri::io::load_phantom_files(pd, t1, args.t1_max)?;
        spec.t1.phantom = format!("files:{}:{}", pd.display(), t1.display());
        let report = nlsparse_harness::t1::run_on_maps(maps, &spec)?;
        let outputs = write_t1_outputs(&dir, &report)?;
        manifest = RunManifest::new(spec, started);
        manifest.trial_seeds = report.seeds;
        manifest.run.outputs = outputs;
    } else {
        let (Some(a_path), Some(y_path)) = (&args.matrix, &args.measurements) else {
            return Err(HarnessError::Config(
                "recover needs --matrix and --measurements, or --pd-image and --t1-image".into(),
            ));
        };
        let kind: ModelKind = args
            .kind
            .parse()
            .map_err(|e: nlsparse::Error| HarnessError::Config(e.to_string()))?;
        let a = read_matrix_csv(a_path)?;
        let y = read_vector_csv(y_path)?;
        let s = recover_vector(kind, a, y, &args.transform, SolverKind::Proposed, &spec.continuation, args.lambda_rel)?;
        write_vector_csv(&dir.join("x.csv"), &s.x)?;
        spec.continuation.lambda_final.insert(kind.to_string(), args.lambda_rel);
        manifest = RunManifest::new(spec, started);
        manifest.run.outputs = vec!["x.csv".into()];
    }
    manifest.run.outputs.push(MANIFEST_FILE.into());
    manifest.run.finished_unix = unix_now();
    manifest.write(&dir.join(MANIFEST_FILE))?;
    Ok(summary(&manifest))
}

fn summary(m: &RunManifest) -> serde_json::Value {
    json!({
        "experiment": m.spec.experiment.to_string(),
        "out_dir": m.spec.out_dir.display().to_string(),
        "outputs": m.run.outputs,
    })
}

fn run(cli: Cli) -> Result<serde_json::Value> {
    let spec = match &cli.command {
        Command::BenchConvergence(c) => c.spec(Experiment::Convergence)?,
        Command::BenchSuccess(c) => c.spec(Experiment::SuccessRate)?,
        Command::T1Pipeline(c) => c.spec(Experiment::T1Pipeline)?,
        Command::Recover(args) => return recover(args),
    };
    Ok(summary(&run_experiment(spec)?))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", json!({"error": {"kind": e.kind(), "message": e.to_string()}}));
            ExitCode::FAILURE
        }
    }
}
