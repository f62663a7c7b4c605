//! Iterative shrinkage solvers for synthesis and analysis priors under linear
//! and non-linear measurement models.

mod config;
mod engine;
mod linear;
mod nonlinear;
mod shrink;
mod trace;

pub use config::{SolverConfig, AUX_C_FACTOR, FOURIER_MRI_Z_BOUNDS};
pub use linear::{ista_analysis_linear, ista_synthesis_linear};
pub use nonlinear::{default_initial, ista_analysis_nonlinear, ista_synthesis_nonlinear};
pub use shrink::{analysis_shrink, soft_threshold, AnalysisStep};
pub use trace::SolverTrace;

use ndarray::ArrayView1;

use crate::linalg::{norm1, LinearOperator};
use crate::measurements::{MeasurementModel, MeasurementVector};
use crate::scalar::Real;
use crate::transforms::AnalysisOperator;
use crate::Result;

/// `‖y − f(x)‖² + λ‖Ψx‖₁` (`Ψ = I` when `psi` is `None`).
pub fn objective<T: Real>(
    model: &MeasurementModel<T>,
    y: &MeasurementVector<T>,
    psi: Option<&AnalysisOperator>,
    lambda: T,
    x: ArrayView1<T>,
) -> Result<T> {
    let penalty = match psi {
        Some(psi) => norm1(psi.analyze(x)?.view()),
        None => norm1(x),
    };
    Ok(model.data_misfit(x, y)? + lambda * penalty)
}

/// `‖y − Ax‖² + λ‖Ψx‖₁` for an operator-form linear model.
pub fn linear_objective<T: Real, Op: LinearOperator<T> + ?Sized>(
    a: &Op,
    y: ArrayView1<T>,
    psi: Option<&AnalysisOperator>,
    lambda: T,
    x: ArrayView1<T>,
) -> Result<T> {
    let r = &y - &a.apply(x)?;
    let penalty = match psi {
        Some(psi) => norm1(psi.analyze(x)?.view()),
        None => norm1(x),
    };
    Ok(r.dot(&r) + lambda * penalty)
}
