//! Shared majorize-then-shrink iteration used by all four solvers:
//! a gradient (Landweber) step on the data term followed by a proximal step
//! for the l1 prior.

use std::time::Instant;

use ndarray::{Array1, ArrayView1};

use super::config::SolverConfig;
use super::shrink::{analysis_shrink, soft_threshold};
use super::trace::SolverTrace;
use crate::error::{Error, Result};
use crate::linalg::{norm1, norm2};
use crate::scalar::Real;
use crate::transforms::AnalysisOperator;

pub(crate) trait DataTerm<T: Real> {
    /// Forward-map state reused by the gradient at the same point.
    type Eval;
    fn len(&self) -> usize;
    /// `‖y − f(x)‖²` and the state behind it.
    fn evaluate(&self, x: ArrayView1<T>) -> Result<(T, Self::Eval)>;
    /// `∇‖y − f(x)‖²` at the point `eval` belongs to.
    fn gradient(&self, x: ArrayView1<T>, eval: &Self::Eval) -> Result<Array1<T>>;
}

pub(crate) enum Prior<'a, T: Real> {
    Synthesis,
    Analysis {
        psi: &'a AnalysisOperator,
        c: T,
    },
}

impl<T: Real> Prior<'_, T> {
    fn penalty(&self, x: ArrayView1<T>) -> Result<T> {
        match self {
            Prior::Synthesis => Ok(norm1(x)),
            Prior::Analysis { psi, .. } => Ok(norm1(psi.analyze(x)?.view())),
        }
    }

    fn initial_coeffs(&self) -> Array1<T> {
        match self {
            Prior::Synthesis => Array1::zeros(0),
            Prior::Analysis { psi, .. } => Array1::zeros(psi.coeff_len()),
        }
    }

    fn shrink(
        &self,
        b: ArrayView1<T>,
        z: ArrayView1<T>,
        step: T,
        cfg: &SolverConfig<T>,
    ) -> Result<(Array1<T>, Array1<T>)> {
        match self {
            Prior::Synthesis => Ok((
                soft_threshold(b, cfg.lambda * step / T::two())?,
                z.to_owned(),
            )),
            Prior::Analysis { psi, c } => {
                let weight = T::two() / (cfg.lambda * step);
                let s = analysis_shrink(psi, b, z, weight, *c, cfg.inner_z_iters)?;
                Ok((s.x, s.z))
            }
        }
    }
}

pub(crate) struct Run<'a, T: Real> {
    pub cfg: &'a SolverConfig<T>,
    pub x0: Array1<T>,
    pub step: T,
    pub backtracking: bool,
    pub bounds: Option<(T, T)>,
}

fn project<T: Real>(x: &mut Array1<T>, bounds: Option<(T, T)>) {
    if let Some((lo, hi)) = bounds {
        x.mapv_inplace(|v| v.max(lo).min(hi));
    }
}

/// Evaluates the misfit, mapping out-of-domain and non-finite values to `None`.
fn try_evaluate<T: Real, D: DataTerm<T>>(
    data: &D,
    x: ArrayView1<T>,
) -> Result<Option<(T, D::Eval)>> {
    match data.evaluate(x) {
        Ok((m, e)) if m.is_finite() => Ok(Some((m, e))),
        Ok(_) | Err(Error::Domain { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

pub(crate) fn run<T: Real, D: DataTerm<T>>(
    data: &D,
    prior: &Prior<'_, T>,
    run: Run<'_, T>,
) -> Result<(Array1<T>, SolverTrace<T>)> {
    let cfg = run.cfg;
    let started = Instant::now();
    let mut x = run.x0;
    if x.len() != data.len() {
        return Err(Error::dim("initial point", data.len(), x.len()));
    }
    if !(run.step > T::zero() && run.step.is_finite()) {
        return Err(Error::Degenerate(format!(
            "step size {} is not a positive finite number",
            run.step
        )));
    }
    let reference_norm = cfg.reference.as_ref().map(|r| norm2(r.view()));
    if let (Some(r), Some(_)) = (&cfg.reference, reference_norm) {
        if r.len() != x.len() {
            return Err(Error::dim("reference", x.len(), r.len()));
        }
    }

    let (mut misfit, mut eval) = data.evaluate(x.view())?;
    let mut z = prior.initial_coeffs();
    let mut best_objective = misfit + cfg.lambda * prior.penalty(x.view())?;
    let mut best = x.clone();
    let mut trace = SolverTrace {
        initial_step: run.step,
        aux_c: match prior {
            Prior::Analysis { c, .. } => Some(*c),
            Prior::Synthesis => None,
        },
        ..Default::default()
    };
    // rounding slack for the non-increase test
    let slack = T::lit(64.0) * T::epsilon();
    let attempts = if run.backtracking { cfg.max_halvings + 1 } else { 1 };

    for _ in 0..cfg.max_outer_iters {
        let grad = data.gradient(x.view(), &eval)?;
        let mut sigma = run.step;
        let mut accepted = None;
        for _ in 0..attempts {
            let b = &x - &(&grad * (sigma / T::two()));
            let b_ok = if run.backtracking {
                matches!(try_evaluate(data, b.view())?, Some((m, _)) if m <= misfit + slack * misfit.abs())
            } else {
                true
            };
            if b_ok {
                let (mut candidate, z_new) = prior.shrink(b.view(), z.view(), sigma, cfg)?;
                project(&mut candidate, run.bounds);
                if let Some((m, e)) = try_evaluate(data, candidate.view())? {
                    accepted = Some((candidate, z_new, m, e, sigma));
                    break;
                }
            }
            sigma = sigma / T::two();
        }

        let Some((x_new, z_new, m_new, e_new, sigma)) = accepted else {
            trace.failure = Some(if run.backtracking {
                format!(
                    "no acceptable step after {} halvings at iteration {}",
                    cfg.max_halvings,
                    trace.iterations + 1
                )
            } else {
                format!(
                    "iterate left the domain of the forward map at iteration {}",
                    trace.iterations + 1
                )
            });
            x = best;
            trace.wall_time = started.elapsed();
            return Ok((x, trace));
        };

        let objective = m_new + cfg.lambda * prior.penalty(x_new.view())?;
        let change = norm2((&x_new - &x).view()) / norm2(x.view()).max(T::lit(1e-12));
        trace.iterations += 1;
        trace.objective.push(objective);
        trace.step_sizes.push(sigma);
        if let (Some(r), Some(rn)) = (&cfg.reference, reference_norm) {
            if rn > T::zero() {
                trace.nmse.push(norm2((r - &x_new).view()) / rn);
            }
        }
        if objective <= best_objective {
            best_objective = objective;
            best.assign(&x_new);
        }
        x = x_new;
        z = z_new;
        misfit = m_new;
        eval = e_new;
        if change < cfg.tol {
            trace.converged = true;
            break;
        }
    }
    trace.wall_time = started.elapsed();
    Ok((x, trace))
}
