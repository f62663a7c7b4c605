use ndarray::{Array1, ArrayView1};

use super::config::{SolverConfig, FOURIER_MRI_Z_BOUNDS};
use super::engine::{self, DataTerm, Prior, Run};
use super::linear::resolve_aux_c;
use super::trace::SolverTrace;
use crate::error::{check_len, Error, Result};
use crate::measurements::{Evaluation, MeasurementModel, MeasurementVector, ModelKind};
use crate::scalar::Real;
use crate::transforms::AnalysisOperator;

struct ModelData<'a, T: Real> {
    model: &'a MeasurementModel<T>,
    y: &'a MeasurementVector<T>,
}

impl<T: Real> DataTerm<T> for ModelData<'_, T> {
    type Eval = Evaluation<T>;

    fn len(&self) -> usize {
        self.model.input_len()
    }

    fn evaluate(&self, x: ArrayView1<T>) -> Result<(T, Evaluation<T>)> {
        let e = self.model.evaluate(x, self.y)?;
        Ok((e.misfit, e))
    }

    fn gradient(&self, x: ArrayView1<T>, eval: &Evaluation<T>) -> Result<Array1<T>> {
        self.model.gradient_at(x, eval)
    }
}

/// Default starting point: zero where it is in the domain of `f`, all-ones otherwise.
pub fn default_initial<T: Real>(model: &MeasurementModel<T>) -> Array1<T> {
    match model.kind() {
        ModelKind::Linear | ModelKind::Exponential => Array1::zeros(model.input_len()),
        ModelKind::Logarithmic | ModelKind::FourierMri => Array1::ones(model.input_len()),
    }
}

fn nonlinear_run<'a, T: Real>(
    model: &MeasurementModel<T>,
    y: &MeasurementVector<T>,
    cfg: &'a SolverConfig<T>,
) -> Result<Run<'a, T>> {
    cfg.validate()?;
    check_len("measurements", model.output_len(), y.len())?;
    let x0 = cfg.initial.clone().unwrap_or_else(|| default_initial(model));
    model.check_domain(x0.view())?;
    let step = match cfg.step_size {
        Some(s) => s,
        None => {
            let a = model.local_gram_norm(x0.view(), cfg.power_iters, cfg.seed)?;
            if !(a > T::zero()) {
                return Err(Error::Degenerate(
                    "local Jacobian is zero at the initial point; set step_size explicitly".into(),
                ));
            }
            T::one() / a
        }
    };
    let bounds = cfg.bounds.or_else(|| {
        (model.kind() == ModelKind::FourierMri)
            .then(|| (T::lit(FOURIER_MRI_Z_BOUNDS.0), T::lit(FOURIER_MRI_Z_BOUNDS.1)))
    });
    Ok(Run {
        cfg,
        x0,
        step,
        backtracking: cfg.backtracking,
        bounds,
    })
}

/// Non-linear ISTA for `min ‖y − f(x)‖² + λ‖x‖₁`:
/// `b = x − (σ/2)∇‖y − f(x)‖²`, then soft thresholding at `λσ/2`.
///
/// With backtracking the step is halved (at most `max_halvings` times) until
/// the data term at `b` does not increase and the thresholded point lies in the
/// domain of `f`. If no such step exists the run stops, the trace carries a
/// failure note and the best iterate so far is returned.
pub fn ista_synthesis_nonlinear<T: Real>(
    model: &MeasurementModel<T>,
    y: &MeasurementVector<T>,
    cfg: &SolverConfig<T>,
) -> Result<(Array1<T>, SolverTrace<T>)> {
    let run = nonlinear_run(model, y, cfg)?;
    engine::run(&ModelData { model, y }, &Prior::Synthesis, run)
}

/// Analysis-prior recovery from non-linear measurements,
/// `min ‖y − f(x)‖² + λ‖Ψx‖₁`.
///
/// Each outer iteration takes the backtracked gradient step of
/// [`ista_synthesis_nonlinear`] and then solves the resulting denoising problem
/// `‖b − x‖² + λσ‖Ψx‖₁` approximately with the z-update, weight `2/(λσ)`.
/// Fourier-MRI iterates are clamped to [`FOURIER_MRI_Z_BOUNDS`] unless
/// `bounds` is configured.
pub fn ista_analysis_nonlinear<T: Real>(
    model: &MeasurementModel<T>,
    y: &MeasurementVector<T>,
    psi: &AnalysisOperator,
    cfg: &SolverConfig<T>,
) -> Result<(Array1<T>, SolverTrace<T>)> {
    check_len("analysis operator", model.input_len(), psi.input_len())?;
    let run = nonlinear_run(model, y, cfg)?;
    let c = resolve_aux_c(psi, cfg)?;
    engine::run(&ModelData { model, y }, &Prior::Analysis { psi, c }, run)
}
