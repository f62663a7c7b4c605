//! Convergence and success-rate benchmarks on random sparse problems.

use rayon::prelude::*;
use serde::Serialize;

use nlsparse::solvers::{default_initial, ista_analysis_linear, ista_analysis_nonlinear};
use nlsparse::{ModelKind, SolverConfig};

use crate::config::ExperimentSpec;
use crate::continuation::{lambda_scale, relative_error, select_lambda, solve, SolverKind};
use crate::instances::sparse_instance;
use crate::manifest::TrialSeed;
use crate::seeds::{derive_seed, fnv1a};
use crate::{HarnessError, Result};

const SOLVERS: [SolverKind; 2] = [SolverKind::Baseline, SolverKind::Proposed];

fn kind_code(kind: ModelKind) -> u64 {
    fnv1a(&kind.to_string())
}

/// Objective per iteration of one solver on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceCurve {
    pub kind: ModelKind,
    pub solver: SolverKind,
    pub lambda: f64,
    pub objective: Vec<f64>,
}

impl ConvergenceCurve {
    pub fn final_objective(&self) -> Option<f64> {
        self.objective.last().copied()
    }

    /// First iteration (1-based) whose objective is within `rel` of `target`.
    pub fn iterations_to_within(&self, target: f64, rel: f64) -> Option<usize> {
        let bound = target + rel * target.abs();
        self.objective.iter().position(|&o| o <= bound).map(|i| i + 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub curves: Vec<ConvergenceCurve>,
    pub seeds: Vec<TrialSeed>,
}

impl ConvergenceReport {
    pub fn curve(&self, kind: ModelKind, solver: SolverKind) -> Option<&ConvergenceCurve> {
        self.curves
            .iter()
            .find(|c| c.kind == kind && c.solver == solver)
    }
}

/// One seeded instance per kind, solved at a single fixed λ from the default
/// starting point with early stopping disabled.
pub fn run_convergence(spec: &ExperimentSpec) -> Result<ConvergenceReport> {
    spec.validate()?;
    let b = &spec.benchmark;
    let conv = &spec.convergence;
    let mut curves = Vec::new();
    let mut seeds = Vec::new();
    for kind in spec.kinds()? {
        let seed = derive_seed(spec.seed, "convergence", &[kind_code(kind)]);
        seeds.push(TrialSeed::new(format!("convergence/{kind}"), seed));
        let inst = sparse_instance(kind, b.m, b.n, conv.sparsity, seed)?;
        let x0 = default_initial(&inst.model);
        let lambda = conv.lambda_rel * lambda_scale(&inst.model, &inst.y, &inst.psi, x0.view())?;
        let mut cfg = SolverConfig::with_lambda(lambda);
        cfg.max_outer_iters = conv.iterations;
        cfg.tol = 0.0;
        cfg.inner_z_iters = spec.continuation.inner_z_iters;
        for solver in SOLVERS.into_iter().filter(|s| s.applies_to(kind)) {
            let (_, trace) = match solver {
                SolverKind::Baseline => {
                    let y = inst.y.as_real().expect("linear measurements are real");
                    ista_analysis_linear(&inst.a, y.view(), &inst.psi, &cfg)?
                }
                SolverKind::Proposed => ista_analysis_nonlinear(&inst.model, &inst.y, &inst.psi, &cfg)?,
            };
            curves.push(ConvergenceCurve {
                kind,
                solver,
                lambda,
                objective: trace.objective,
            });
        }
    }
    Ok(ConvergenceReport { curves, seeds })
}

/// Success counts for one kind, solver and sparsity level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuccessRow {
    pub kind: String,
    pub solver: String,
    pub sparsity: usize,
    pub trials: usize,
    pub successes: usize,
    pub rate: f64,
    pub mean_iterations: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuccessReport {
    pub rows: Vec<SuccessRow>,
    pub seeds: Vec<TrialSeed>,
}

impl SuccessReport {
    pub fn rate(&self, kind: ModelKind, solver: SolverKind, sparsity: usize) -> Option<f64> {
        let (kind, solver) = (kind.to_string(), solver.to_string());
        self.rows
            .iter()
            .find(|r| r.kind == kind && r.solver == solver && r.sparsity == sparsity)
            .map(|r| r.rate)
    }
}

/// Fills `continuation.lambda_final` for every benchmark kind that lacks one,
/// using held-out instances whose seeds never coincide with trial seeds.
pub fn resolve_lambdas(spec: &mut ExperimentSpec) -> Result<Vec<TrialSeed>> {
    let mut seeds = Vec::new();
    for kind in spec.kinds()? {
        let name = kind.to_string();
        if spec.continuation.lambda_final.contains_key(&name) {
            continue;
        }
        let held_out: Vec<u64> = (0..spec.continuation.selection_instances.max(1) as u64)
            .map(|i| derive_seed(spec.seed, "held-out", &[kind_code(kind), i]))
            .collect();
        for (i, &s) in held_out.iter().enumerate() {
            seeds.push(TrialSeed::new(format!("held-out/{name}/{i}"), s));
        }
        let rel = select_lambda(kind, spec.benchmark.m, spec.benchmark.n, &spec.continuation, &held_out)?;
        spec.continuation.lambda_final.insert(name, rel);
    }
    Ok(seeds)
}

struct Job {
    kind: ModelKind,
    sparsity: usize,
    trial: usize,
    seed: u64,
}

/// Fresh instance per (kind, sparsity, trial); every applicable solver runs on
/// the same instance. Trials execute in parallel and are aggregated in a fixed
/// order, so the result does not depend on scheduling.
pub fn run_success_rate(spec: &ExperimentSpec) -> Result<SuccessReport> {
    spec.validate()?;
    let b = &spec.benchmark;
    let kinds = spec.kinds()?;
    let lambda_of = |kind: ModelKind| -> Result<f64> {
        spec.continuation
            .lambda_final
            .get(&kind.to_string())
            .copied()
            .ok_or_else(|| HarnessError::Config(format!("no final λ resolved for {kind}")))
    };
    let mut jobs = Vec::new();
    for &kind in &kinds {
        lambda_of(kind)?;
        for &k in &b.sparsity {
            for trial in 0..b.trials {
                let seed = derive_seed(spec.seed, "success", &[kind_code(kind), k as u64, trial as u64]);
                jobs.push(Job {
                    kind,
                    sparsity: k,
                    trial,
                    seed,
                });
            }
        }
    }

    let outcomes = jobs
        .par_iter()
        .map(|job| -> Result<Vec<(SolverKind, bool, usize)>> {
            let mut inst = sparse_instance(job.kind, b.m, b.n, job.sparsity, job.seed)?;
            if b.noise_sigma > 0.0 {
                let model = inst.model.clone().with_noise(b.noise_sigma)?;
                inst.y = model.measure(inst.x_true.view(), job.seed ^ 0x6e6f_6973_65)?;
            }
            let rel = lambda_of(job.kind)?;
            SOLVERS
                .into_iter()
                .filter(|s| s.applies_to(job.kind))
                .map(|solver| {
                    let s = solve(&inst, solver, &spec.continuation, rel)?;
                    let err = relative_error(inst.x_true.view(), s.x.view());
                    Ok((solver, err < b.success_threshold, s.iterations))
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for &kind in &kinds {
        for &k in &b.sparsity {
            for solver in SOLVERS.into_iter().filter(|s| s.applies_to(kind)) {
                let mut successes = 0;
                let mut iterations = 0usize;
                for (job, outcome) in jobs.iter().zip(&outcomes) {
                    if job.kind != kind || job.sparsity != k {
                        continue;
                    }
                    let &(_, ok, iters) = outcome
                        .iter()
                        .find(|(s, _, _)| *s == solver)
                        .expect("solver ran for this job");
                    successes += ok as usize;
                    iterations += iters;
                }
                rows.push(SuccessRow {
                    kind: kind.to_string(),
                    solver: solver.to_string(),
                    sparsity: k,
                    trials: b.trials,
                    successes,
                    rate: successes as f64 / b.trials as f64,
                    mean_iterations: iterations as f64 / b.trials as f64,
                });
            }
        }
    }
    let seeds = jobs
        .iter()
        .map(|j| TrialSeed::new(format!("success/{}/{}/{}", j.kind, j.sparsity, j.trial), j.seed))
        .collect();
    Ok(SuccessReport { rows, seeds })
}
