use ndarray::{Array1, ArrayView1};

use super::config::{SolverConfig, AUX_C_FACTOR};
use super::engine::{self, DataTerm, Prior, Run};
use super::trace::SolverTrace;
use crate::error::{check_len, Result};
use crate::linalg::{gram_norm, LinearOperator};
use crate::scalar::Real;
use crate::transforms::AnalysisOperator;

struct LinearData<'a, T: Real, Op: ?Sized> {
    op: &'a Op,
    y: ArrayView1<'a, T>,
}

impl<T: Real, Op: LinearOperator<T> + ?Sized> DataTerm<T> for LinearData<'_, T, Op> {
    /// Residual `y − Ax`.
    type Eval = Array1<T>;

    fn len(&self) -> usize {
        self.op.input_len()
    }

    fn evaluate(&self, x: ArrayView1<T>) -> Result<(T, Array1<T>)> {
        let r = &self.y - &self.op.apply(x)?;
        Ok((r.dot(&r), r))
    }

    fn gradient(&self, _x: ArrayView1<T>, r: &Array1<T>) -> Result<Array1<T>> {
        Ok(self.op.apply_adjoint(r.view())?.mapv(|v| -T::two() * v))
    }
}

fn linear_run<'a, T: Real, Op: LinearOperator<T> + ?Sized>(
    a: &Op,
    y: ArrayView1<T>,
    cfg: &'a SolverConfig<T>,
) -> Result<Run<'a, T>> {
    cfg.validate()?;
    check_len("measurements", a.output_len(), y.len())?;
    let step = match cfg.step_size {
        Some(s) => s,
        None => T::one() / gram_norm(a, cfg.power_iters, cfg.seed)?,
    };
    Ok(Run {
        cfg,
        x0: cfg
            .initial
            .clone()
            .unwrap_or_else(|| Array1::zeros(a.input_len())),
        step,
        backtracking: false,
        bounds: cfg.bounds,
    })
}

pub(crate) fn resolve_aux_c<T: Real>(psi: &AnalysisOperator, cfg: &SolverConfig<T>) -> Result<T> {
    match cfg.aux_c {
        Some(c) => Ok(c),
        None => Ok(T::lit(AUX_C_FACTOR) * psi.gram_norm::<T>(cfg.power_iters, cfg.seed)?),
    }
}

/// Iterative soft thresholding for `min ‖y − Ax‖² + λ‖x‖₁`:
/// `b = x + σAᵀ(y − Ax)` followed by soft thresholding at `λσ/2`, with
/// `σ = 1/a` unless configured.
pub fn ista_synthesis_linear<T, Op>(
    a: &Op,
    y: ArrayView1<T>,
    cfg: &SolverConfig<T>,
) -> Result<(Array1<T>, SolverTrace<T>)>
where
    T: Real,
    Op: LinearOperator<T> + ?Sized,
{
    let run = linear_run(a, y, cfg)?;
    engine::run(&LinearData { op: a, y }, &Prior::Synthesis, run)
}

/// Analysis-prior ISTA for `min ‖y − Ax‖² + λ‖Ψx‖₁`: the same Landweber step,
/// then `inner_z_iters` sweeps of the z-update and `x = b − Ψᵀz`. The
/// coefficients `z` are warm-started across outer iterations from zero.
pub fn ista_analysis_linear<T, Op>(
    a: &Op,
    y: ArrayView1<T>,
    psi: &AnalysisOperator,
    cfg: &SolverConfig<T>,
) -> Result<(Array1<T>, SolverTrace<T>)>
where
    T: Real,
    Op: LinearOperator<T> + ?Sized,
{
    check_len("analysis operator", a.input_len(), psi.input_len())?;
    let run = linear_run(a, y, cfg)?;
    let c = resolve_aux_c(psi, cfg)?;
    engine::run(&LinearData { op: a, y }, &Prior::Analysis { psi, c }, run)
}
