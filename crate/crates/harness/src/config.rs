//! Experiment specification, read from TOML.
//!
//! Every field has a default, so an empty file describes the full-size
//! experiment. A run manifest is itself a valid specification: its `run` and
//! `trial_seeds` tables are ignored on input.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nlsparse::ModelKind;
use serde::{Deserialize, Serialize};

use crate::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Convergence,
    SuccessRate,
    T1Pipeline,
    Recover,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Experiment::Convergence => "convergence",
            Experiment::SuccessRate => "success-rate",
            Experiment::T1Pipeline => "t1-pipeline",
            Experiment::Recover => "recover",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub benchmark: BenchmarkSpec,
    pub continuation: Continuation,
    pub convergence: ConvergenceSpec,
    pub t1: T1Spec,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            experiment: Experiment::SuccessRate,
            seed: 2016,
            out_dir: PathBuf::from("out"),
            benchmark: BenchmarkSpec::default(),
            continuation: Continuation::default(),
            convergence: ConvergenceSpec::default(),
            t1: T1Spec::default(),
        }
    }
}

/// Random `m × n` problems with `k`-sparse Haar coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkSpec {
    pub m: usize,
    pub n: usize,
    pub sparsity: Vec<usize>,
    pub trials: usize,
    pub kinds: Vec<String>,
    pub noise_sigma: f64,
    /// A trial succeeds when the relative error is below this value.
    pub success_threshold: f64,
}

impl Default for BenchmarkSpec {
    fn default() -> Self {
        BenchmarkSpec {
            m: 40,
            n: 100,
            sparsity: (1..=25).collect(),
            trials: 200,
            kinds: ["linear", "exponential", "logarithmic"]
                .map(String::from)
                .to_vec(),
            noise_sigma: 0.0,
            success_threshold: 1e-3,
        }
    }
}

/// Warm-started sequence of solves with geometrically decreasing λ.
///
/// λ is expressed relative to `‖Ψ∇‖∞` at the starting point. Stage `s` of
/// `stages` uses `start · (final/start)^(s/(stages−1))`. Intermediate stages
/// stop at `stage_iters` iterations or relative change `tol`; the last stage
/// at `final_iters` or `final_tol`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Continuation {
    pub start: f64,
    pub stages: usize,
    pub stage_iters: usize,
    pub final_iters: usize,
    pub tol: f64,
    pub final_tol: f64,
    pub inner_z_iters: usize,
    /// Candidates for the final relative λ.
    pub lambda_grid: Vec<f64>,
    /// Held-out instances scored per candidate.
    pub selection_instances: usize,
    pub selection_sparsity: usize,
    /// Final relative λ per measurement kind. Kinds missing here are selected
    /// from `lambda_grid` and written back into the manifest.
    pub lambda_final: BTreeMap<String, f64>,
}

impl Default for Continuation {
    fn default() -> Self {
        Continuation {
            start: 0.5,
            stages: 9,
            stage_iters: 5_000,
            final_iters: 1_000_000,
            tol: 1e-9,
            final_tol: 1e-11,
            inner_z_iters: 5,
            lambda_grid: vec![1e-3, 1e-4, 1e-5, 1e-6],
            selection_instances: 3,
            selection_sparsity: 10,
            lambda_final: BTreeMap::new(),
        }
    }
}

/// Fixed-λ runs recording the objective at every iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceSpec {
    pub sparsity: usize,
    pub lambda_rel: f64,
    pub iterations: usize,
}

impl Default for ConvergenceSpec {
    fn default() -> Self {
        ConvergenceSpec {
            sparsity: 10,
            lambda_rel: 1e-3,
            iterations: 2_000,
        }
    }
}

/// Settings for one recovery stage of the T1 pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StageSpec {
    /// `haar` or `finite-difference`.
    pub transform: String,
    /// λ relative to `‖Ψ∇‖∞` at the starting point.
    pub lambda_rel: f64,
    pub max_iters: usize,
    pub tol: f64,
    pub inner_z_iters: usize,
}

impl Default for StageSpec {
    fn default() -> Self {
        StageSpec {
            transform: "finite-difference".into(),
            lambda_rel: 1e-3,
            max_iters: 200,
            tol: 1e-7,
            inner_z_iters: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct T1Spec {
    /// `shepp-logan` or `blocks`.
    pub phantom: String,
    pub size: usize,
    /// `[pd_fraction, t1_fraction]` pairs.
    pub splits: Vec<[f64; 2]>,
    pub noise_sigma: f64,
    pub density_power: f64,
    pub pd: StageSpec,
    pub t1: StageSpec,
}

impl Default for T1Spec {
    fn default() -> Self {
        T1Spec {
            phantom: "shepp-logan".into(),
            size: 128,
            splits: vec![[0.2, 0.8], [0.3, 0.7], [0.4, 0.6], [0.5, 0.5]],
            noise_sigma: 0.0,
            density_power: nlsparse::mri::DEFAULT_DENSITY_POWER,
            pd: StageSpec {
                lambda_rel: 3e-3,
                ..StageSpec::default()
            },
            t1: StageSpec::default(),
        }
    }
}

/// Parses a comma-separated list of measurement kinds.
pub fn parse_kinds(list: &[String]) -> Result<Vec<ModelKind>> {
    list.iter()
        .map(|s| {
            ModelKind::from_str(s.trim()).map_err(|e| HarnessError::Config(e.to_string()))
        })
        .collect()
}

/// Parses `0.3/0.7,0.4/0.6` or `30/70,40/60` into fraction pairs.
pub fn parse_splits(text: &str) -> Result<Vec<[f64; 2]>> {
    text.split(',')
        .map(|item| {
            let (a, b) = item.trim().split_once('/').ok_or_else(|| {
                HarnessError::Config(format!("split `{item}` is not of the form pd/t1"))
            })?;
            let parse = |v: &str| -> Result<f64> {
                let x: f64 = v
                    .trim()
                    .parse()
                    .map_err(|_| HarnessError::Config(format!("bad fraction `{v}`")))?;
                Ok(if x > 1.0 { x / 100.0 } else { x })
            };
            Ok([parse(a)?, parse(b)?])
        })
        .collect()
}

impl ExperimentSpec {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let parse_err = |message: String| HarnessError::Parse {
            path: origin.to_string(),
            message,
        };
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| parse_err(e.to_string()))?;
        table.remove("run");
        table.remove("trial_seeds");
        let spec: ExperimentSpec = table
            .try_into()
            .map_err(|e: toml::de::Error| parse_err(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    pub fn kinds(&self) -> Result<Vec<ModelKind>> {
        parse_kinds(&self.benchmark.kinds)
    }

    pub fn validate(&self) -> Result<()> {
        let b = &self.benchmark;
        let fail = |msg: String| Err(HarnessError::Config(msg));
        if b.m == 0 || b.n < 2 {
            return fail(format!("problem size {}×{} is too small", b.m, b.n));
        }
        if b.trials == 0 {
            return fail("trial count must be at least 1".into());
        }
        if self.seed > i64::MAX as u64 {
            return fail(format!("seed {} does not fit a TOML integer", self.seed));
        }
        if let Some(&k) = b.sparsity.iter().find(|&&k| k == 0 || k >= b.n) {
            return fail(format!("sparsity {k} must be in 1..{}", b.n));
        }
        for kind in self.kinds()? {
            if kind == ModelKind::FourierMri {
                return fail("benchmarks use matrix measurement kinds".into());
            }
        }
        let c = &self.continuation;
        if c.stages == 0 || !(c.start > 0.0) || c.lambda_grid.iter().any(|&l| !(l > 0.0)) {
            return fail("continuation needs ≥ 1 stage and positive λ values".into());
        }
        if c.lambda_grid.is_empty() && c.lambda_final.len() < self.kinds()?.len() {
            return fail("empty lambda_grid with kinds lacking a final λ".into());
        }
        if let Some((k, v)) = c.lambda_final.iter().find(|(_, &v)| !(v > 0.0)) {
            return fail(format!("lambda_final for {k} must be > 0, got {v}"));
        }
        parse_kinds(&c.lambda_final.keys().cloned().collect::<Vec<_>>())?;
        if self.convergence.sparsity == 0 || self.convergence.sparsity >= b.n {
            return fail("convergence sparsity out of range".into());
        }
        for [pd, t1] in &self.t1.splits {
            if !(*pd > 0.0 && *t1 > 0.0 && pd + t1 <= 1.0 + 1e-12) {
                return fail(format!("split {pd}/{t1} must be positive and sum to at most 1"));
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("specification is always serialisable")
    }
}
