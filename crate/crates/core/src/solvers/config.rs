use ndarray::Array1;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default clamp applied to `Z` by the non-linear solvers on Fourier-MRI models.
pub const FOURIER_MRI_Z_BOUNDS: (f64, f64) = (0.01, 20.0);

/// Safety factor on the largest eigenvalue of `ΨΨᵀ` when `aux_c` is automatic.
pub const AUX_C_FACTOR: f64 = 1.05;

/// Solver parameters. `None` entries are resolved per solve:
///
/// * `step_size`: `1/a`, with `a` the largest eigenvalue of `AᵀA` (linear
///   solvers) or of the local Jacobian Gram `JᵀJ` at the initial point
///   (non-linear solvers), estimated by seeded power iteration.
/// * `aux_c`: `1.05 ×` the largest eigenvalue of `ΨΨᵀ`.
/// * `initial`: zeros, except all-ones for the logarithmic and Fourier-MRI
///   families whose domain excludes zero.
/// * `bounds`: none, except [`FOURIER_MRI_Z_BOUNDS`] for Fourier-MRI models.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T: Real> {
    pub lambda: T,
    pub step_size: Option<T>,
    pub aux_c: Option<T>,
    pub max_outer_iters: usize,
    pub inner_z_iters: usize,
    /// Stop once `‖x_k − x_{k−1}‖ / max(‖x_{k−1}‖, 1e-12)` drops below this.
    pub tol: T,
    /// Halve the step until the data term does not increase (non-linear solvers).
    pub backtracking: bool,
    pub max_halvings: usize,
    pub power_iters: usize,
    pub seed: u64,
    pub initial: Option<Array1<T>>,
    pub bounds: Option<(T, T)>,
    /// Ground truth for per-iteration NMSE in the trace.
    pub reference: Option<Array1<T>>,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        SolverConfig {
            lambda: T::lit(1e-3),
            step_size: None,
            aux_c: None,
            max_outer_iters: 1000,
            inner_z_iters: 5,
            tol: T::lit(1e-6),
            backtracking: true,
            max_halvings: 50,
            power_iters: 100,
            seed: 0,
            initial: None,
            bounds: None,
            reference: None,
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn with_lambda(lambda: T) -> Self {
        SolverConfig {
            lambda,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, format!("{v} must be finite and > 0")))
            }
        };
        positive("lambda", self.lambda)?;
        if let Some(s) = self.step_size {
            positive("step_size", s)?;
        }
        if let Some(c) = self.aux_c {
            positive("aux_c", c)?;
        }
        if !(self.tol >= T::zero()) {
            return Err(Error::param("tol", "must be >= 0"));
        }
        if self.max_outer_iters == 0 {
            return Err(Error::param("max_outer_iters", "must be >= 1"));
        }
        if let Some((lo, hi)) = self.bounds {
            if !(lo < hi) {
                return Err(Error::param("bounds", "lower bound must be below upper bound"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_positive_parameters() {
        let mut c = SolverConfig::<f64>::with_lambda(0.0);
        assert!(c.validate().is_err());
        c.lambda = 1.0;
        assert!(c.validate().is_ok());
        c.step_size = Some(-1.0);
        assert!(c.validate().is_err());
        c.step_size = None;
        c.aux_c = Some(0.0);
        assert!(c.validate().is_err());
        c.aux_c = None;
        c.tol = -1.0;
        assert!(c.validate().is_err());
    }
}
