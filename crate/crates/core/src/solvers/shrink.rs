//! Proximal steps: soft thresholding (synthesis prior) and the iterative
//! z-update for the analysis prior.

use ndarray::{Array1, ArrayView1, Zip};

use crate::error::{check_len, Error, Result};
use crate::scalar::Real;
use crate::transforms::AnalysisOperator;

/// `signum(b)·max(0, |b| − tau)` elementwise.
pub fn soft_threshold<T: Real>(b: ArrayView1<T>, tau: T) -> Result<Array1<T>> {
    if !(tau >= T::zero()) {
        return Err(Error::param("tau", format!("{tau} must be >= 0")));
    }
    Ok(b.mapv(|v| v.signum() * (v.abs() - tau).max(T::zero())))
}

/// Result of [`analysis_shrink`].
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisStep<T: Real> {
    pub x: Array1<T>,
    pub z: Array1<T>,
}

/// Approximately solves `min_x ‖b − x‖² + (λσ)‖Ψx‖₁` by `iters` sweeps of
///
/// ```text
/// z ← (w·D⁻¹ + cI)⁻¹ (c·z + Ψ(b − Ψᵀz)),   D⁻¹ = diag(|Ψb|),   w = 2/(λσ)
/// x = b − Ψᵀz
/// ```
///
/// starting from `z`. `weight` is `w`; `c` must exceed the largest eigenvalue
/// of `ΨΨᵀ`. `D⁻¹` is formed directly, so coefficients with `Ψb = 0` reduce to
/// the plain update `z ← z + (Ψ(b − Ψᵀz))/c` without any division by zero.
pub fn analysis_shrink<T: Real>(
    psi: &AnalysisOperator,
    b: ArrayView1<T>,
    z: ArrayView1<T>,
    weight: T,
    c: T,
    iters: usize,
) -> Result<AnalysisStep<T>> {
    check_len("analysis shrink coefficients", psi.coeff_len(), z.len())?;
    if !(c > T::zero()) {
        return Err(Error::param("aux_c", "must be > 0"));
    }
    if !(weight >= T::zero()) {
        return Err(Error::param("weight", "must be >= 0"));
    }
    let psi_b = psi.analyze(b)?;
    let denom = psi_b.mapv(|d| weight * d.abs() + c);
    let mut z = z.to_owned();
    if psi.is_orthonormal() {
        // Ψ(b − Ψᵀz) = Ψb − z, so every sweep is elementwise.
        for _ in 0..iters {
            Zip::from(&mut z)
                .and(&psi_b)
                .and(&denom)
                .for_each(|zi, &p, &den| *zi = (c * *zi + p - *zi) / den);
        }
    } else {
        for _ in 0..iters {
            let x = &b - &psi.synthesize(z.view())?;
            let psi_x = psi.analyze(x.view())?;
            Zip::from(&mut z)
                .and(&psi_x)
                .and(&denom)
                .for_each(|zi, &p, &den| *zi = (c * *zi + p) / den);
        }
    }
    let x = &b - &psi.synthesize(z.view())?;
    Ok(AnalysisStep { x, z })
}
