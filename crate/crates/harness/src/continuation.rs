//! λ continuation around the fixed-λ solvers, and held-out λ selection.

use std::fmt;

use ndarray::{Array1, Array2, ArrayView1};
use nlsparse::solvers::{default_initial, ista_analysis_linear, ista_analysis_nonlinear};
use nlsparse::{AnalysisOperator, MeasurementModel, MeasurementVector, ModelKind, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::config::Continuation;
use crate::instances::{sparse_instance, SparseInstance};
use crate::{HarnessError, Result};

/// The two analysis-prior solvers compared in the benchmarks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    /// Linear analysis ISTA with the fixed step `1/‖AᵀA‖`.
    Baseline,
    /// Non-linear analysis ISTA with backtracking.
    Proposed,
}

impl SolverKind {
    pub fn applies_to(self, kind: ModelKind) -> bool {
        self == SolverKind::Proposed || kind == ModelKind::Linear
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverKind::Baseline => "baseline",
            SolverKind::Proposed => "proposed",
        })
    }
}

/// `‖Ψ∇‖y − f(x₀)‖²‖∞`: the smallest λ for which `x₀` is a fixed point when
/// `Ψ` is orthonormal. Relative λ values are multiples of this.
pub fn lambda_scale(
    model: &MeasurementModel<f64>,
    y: &MeasurementVector<f64>,
    psi: &AnalysisOperator,
    x0: ArrayView1<f64>,
) -> Result<f64> {
    let g = model.residual_gradient(x0, y)?;
    Ok(psi.analyze(g.view())?.iter().fold(0.0, |m, v| m.max(v.abs())))
}

/// Outcome of a continuation run.
#[derive(Debug, Clone, PartialEq)]
pub struct Solve {
    pub x: Array1<f64>,
    /// Outer iterations summed over all stages.
    pub iterations: usize,
    /// Failure notes from stages that stopped early.
    pub failures: Vec<String>,
}

/// Relative λ of every stage, ending at `final_rel`.
pub fn schedule(cont: &Continuation, final_rel: f64) -> Vec<f64> {
    if cont.stages == 1 {
        return vec![final_rel];
    }
    let last = (cont.stages - 1) as f64;
    (0..cont.stages)
        .map(|s| cont.start * (final_rel / cont.start).powf(s as f64 / last))
        .collect()
}

/// A recovery problem as seen by the continuation driver. `a` is the matrix
/// inside `model`; the baseline solver uses it directly.
#[derive(Debug, Clone, Copy)]
pub struct Problem<'a> {
    pub a: &'a Array2<f64>,
    pub model: &'a MeasurementModel<f64>,
    pub y: &'a MeasurementVector<f64>,
    pub psi: &'a AnalysisOperator,
}

impl SparseInstance {
    pub fn problem(&self) -> Problem<'_> {
        Problem {
            a: &self.a,
            model: &self.model,
            y: &self.y,
            psi: &self.psi,
        }
    }
}

/// Runs `solver` on a benchmark instance; see [`solve_problem`].
pub fn solve(
    inst: &SparseInstance,
    solver: SolverKind,
    cont: &Continuation,
    final_rel: f64,
) -> Result<Solve> {
    solve_problem(inst.problem(), solver, cont, final_rel)
}

/// Runs `solver` through the continuation schedule, warm-starting each stage
/// from the previous one.
pub fn solve_problem(
    p: Problem<'_>,
    solver: SolverKind,
    cont: &Continuation,
    final_rel: f64,
) -> Result<Solve> {
    let kind = p.model.kind();
    if !solver.applies_to(kind) {
        return Err(HarnessError::Config(format!(
            "the {solver} solver needs linear measurements, not {kind}"
        )));
    }
    let x0 = default_initial(p.model);
    let scale = lambda_scale(p.model, p.y, p.psi, x0.view())?;
    let mut out = Solve {
        x: x0,
        iterations: 0,
        failures: Vec::new(),
    };
    if scale == 0.0 {
        return Ok(out);
    }
    let lambdas = schedule(cont, final_rel);
    let y_real = p.y.as_real();
    for (stage, rel) in lambdas.iter().enumerate() {
        let mut cfg = SolverConfig::with_lambda(scale * rel);
        (cfg.max_outer_iters, cfg.tol) = if stage + 1 == lambdas.len() {
            (cont.final_iters, cont.final_tol)
        } else {
            (cont.stage_iters, cont.tol)
        };
        cfg.inner_z_iters = cont.inner_z_iters;
        cfg.initial = Some(out.x.clone());
        let (x, trace) = match solver {
            SolverKind::Baseline => {
                let y = y_real.expect("linear measurements are real");
                ista_analysis_linear(p.a, y.view(), p.psi, &cfg)?
            }
            SolverKind::Proposed => ista_analysis_nonlinear(p.model, p.y, p.psi, &cfg)?,
        };
        out.iterations += trace.iterations;
        if let Some(note) = trace.failure {
            out.failures.push(format!("stage {stage}: {note}"));
        }
        out.x = x;
    }
    Ok(out)
}

/// Picks the final relative λ from `cont.lambda_grid` by the median error of
/// the proposed solver over held-out instances; ties go to the larger λ.
pub fn select_lambda(
    kind: ModelKind,
    m: usize,
    n: usize,
    cont: &Continuation,
    seeds: &[u64],
) -> Result<f64> {
    let instances = seeds
        .iter()
        .map(|&s| sparse_instance(kind, m, n, cont.selection_sparsity, s))
        .collect::<Result<Vec<_>>>()?;
    let mut grid = cont.lambda_grid.clone();
    grid.sort_by(|a, b| b.total_cmp(a));
    let mut best: Option<(f64, f64)> = None;
    for &rel in &grid {
        let mut errors = instances
            .iter()
            .map(|inst| {
                let s = solve(inst, SolverKind::Proposed, cont, rel)?;
                Ok(relative_error(inst.x_true.view(), s.x.view()))
            })
            .collect::<Result<Vec<f64>>>()?;
        errors.sort_by(f64::total_cmp);
        let median = errors[errors.len() / 2];
        if best.map_or(true, |(_, e)| median < e) {
            best = Some((rel, median));
        }
    }
    best.map(|(rel, _)| rel)
        .ok_or_else(|| HarnessError::Config("lambda_grid is empty".into()))
}

/// `‖t − e‖/‖t‖`, or `‖e‖` when the truth is zero.
pub fn relative_error(truth: ArrayView1<f64>, estimate: ArrayView1<f64>) -> f64 {
    nlsparse::mri::nmse(truth, estimate)
        .unwrap_or_else(|_| estimate.dot(&estimate).sqrt())
}
