//! Signal simulation, acquisition and the PD / T1 recovery stages.

use ndarray::{Array1, ArrayView1, Zip};

use super::phantom::TissueMaps;
use super::protocol::ScanProtocol;
use crate::error::{check_len, Error, Result};
use crate::linalg::norm2;
use crate::measurements::{add_noise, FourierSampler, MeasurementModel, MeasurementVector, SamplingMask};
use crate::scalar::Real;
use crate::solvers::{ista_analysis_linear, ista_analysis_nonlinear, SolverConfig, SolverTrace};
use crate::transforms::AnalysisOperator;

/// Pixels whose PD estimate falls below this fraction of the maximum are
/// treated as background in T1 recovery.
pub const BACKGROUND_PD_FRACTION: f64 = 0.01;

/// Saturation-recovery magnitude `ρ(1 − e^{−TR/T1})` (short echo time).
pub fn simulate_signal<T: Real>(maps: &TissueMaps<T>, tr: T) -> Result<Array1<T>> {
    if !(tr > T::zero()) {
        return Err(Error::param("tr", format!("{tr} must be > 0")));
    }
    Ok(Zip::from(maps.pd())
        .and(maps.t1())
        .map_collect(|&rho, &t1| rho * (T::one() - (-tr / t1).exp())))
}

/// `R F x + η` for the simulated image at repetition time `tr`.
pub fn acquire<T: Real>(
    maps: &TissueMaps<T>,
    tr: T,
    mask: &SamplingMask,
    noise_sigma: T,
    seed: u64,
) -> Result<MeasurementVector<T>> {
    if mask.rows() != maps.rows() || mask.cols() != maps.cols() {
        return Err(Error::dim("mask", maps.len(), mask.len()));
    }
    let x = simulate_signal(maps, tr)?;
    let sampler = FourierSampler::new(mask.clone())?;
    let y = MeasurementVector::Complex(sampler.sample(x.view())?);
    add_noise(&y, noise_sigma, seed)
}

/// Solves `min ‖y − RFρ‖² + λ‖Ψρ‖₁` with analysis ISTA and returns the real
/// field with negative values clamped to zero.
pub fn recover_pd<T: Real>(
    y: &MeasurementVector<T>,
    mask: &SamplingMask,
    psi: &AnalysisOperator,
    cfg: &SolverConfig<T>,
) -> Result<(Array1<T>, SolverTrace<T>)> {
    let samples = y
        .as_complex()
        .ok_or_else(|| Error::param("y", "K-space measurements must be complex"))?;
    let sampler = FourierSampler::new(mask.clone())?;
    check_len("k-space samples", sampler.sample_count(), samples.len())?;
    let (rho, trace) = ista_analysis_linear(&sampler, y.to_stacked().view(), psi, cfg)?;
    Ok((rho.mapv(|v| v.max(T::zero())), trace))
}

#[derive(Debug, Clone)]
pub struct T1Estimate<T: Real> {
    /// T1 in the units of `tr_t1`; zero on excluded pixels.
    pub t1: Array1<T>,
    /// Recovered `Z = TR/T1` over the whole grid.
    pub z: Array1<T>,
    /// Pixels that were unknowns of the T1 problem.
    pub support: Vec<bool>,
    pub trace: SolverTrace<T>,
}

impl<T: Real> T1Estimate<T> {
    pub fn excluded(&self) -> usize {
        self.support.iter().filter(|&&s| !s).count()
    }
}

/// Solves `min ‖y − RFρ(1 − e^{−Z})‖² + λ‖ΨZ‖₁` with the non-linear analysis
/// solver using `ρ = pd_estimate`, then maps `T1 = tr_t1 / Z`.
///
/// Pixels with `pd_estimate < 0.01·max` carry no information about `Z`: they
/// are removed from the unknowns (their `ρ` is zeroed and their gradient
/// masked) and reported as `T1 = 0`.
pub fn recover_t1<T: Real>(
    y: &MeasurementVector<T>,
    mask: &SamplingMask,
    pd_estimate: ArrayView1<T>,
    tr_t1: T,
    psi: &AnalysisOperator,
    cfg: &SolverConfig<T>,
) -> Result<T1Estimate<T>> {
    if !(tr_t1 > T::zero()) {
        return Err(Error::param("tr_t1", format!("{tr_t1} must be > 0")));
    }
    check_len("pd estimate", mask.len(), pd_estimate.len())?;
    let peak = pd_estimate.iter().copied().fold(T::zero(), T::max);
    if !(peak > T::zero()) {
        return Err(Error::Degenerate("PD estimate has no tissue".into()));
    }
    let threshold = peak * T::lit(BACKGROUND_PD_FRACTION);
    let support: Vec<bool> = pd_estimate.iter().map(|&p| p >= threshold).collect();
    let rho = Zip::from(&pd_estimate).map_collect(|&p| if p >= threshold { p } else { T::zero() });
    let model = MeasurementModel::fourier_mri(mask.clone(), rho)?.with_support(support.clone())?;
    let (z, trace) = ista_analysis_nonlinear(&model, y, psi, cfg)?;
    let t1 = Zip::from(&z)
        .and(&Array1::from(support.clone()))
        .map_collect(|&zi, &keep| if keep { tr_t1 / zi } else { T::zero() });
    Ok(T1Estimate {
        t1,
        z,
        support,
        trace,
    })
}

/// Relative error `‖truth − estimate‖₂ / ‖truth‖₂`.
///
/// This is the ratio of norms, not its square: an all-zero estimate scores 1.
pub fn nmse<T: Real>(truth: ArrayView1<T>, estimate: ArrayView1<T>) -> Result<T> {
    check_len("nmse", truth.len(), estimate.len())?;
    let denom = norm2(truth);
    if denom == T::zero() {
        return Err(Error::Degenerate("NMSE undefined for an all-zero reference".into()));
    }
    Ok(norm2((&truth - &estimate).view()) / denom)
}

/// [`nmse`] restricted to the pixels where `region` is true.
pub fn nmse_in<T: Real>(truth: ArrayView1<T>, estimate: ArrayView1<T>, region: &[bool]) -> Result<T> {
    check_len("nmse region", truth.len(), region.len())?;
    let pick = |v: ArrayView1<T>| -> Array1<T> {
        v.iter()
            .zip(region)
            .filter_map(|(&x, &r)| r.then_some(x))
            .collect()
    };
    nmse(pick(truth).view(), pick(estimate).view())
}

/// Solver settings for the two stages of [`run_two_scan`].
#[derive(Debug, Clone)]
pub struct PipelineConfig<T: Real> {
    pub pd: SolverConfig<T>,
    pub t1: SolverConfig<T>,
}

#[derive(Debug, Clone)]
pub struct TwoScanResult<T: Real> {
    pub pd_mask: SamplingMask,
    pub t1_mask: SamplingMask,
    pub pd_estimate: Array1<T>,
    pub pd_trace: SolverTrace<T>,
    pub t1: T1Estimate<T>,
    /// PD error against the true `ρ` over the whole grid.
    pub pd_nmse: T,
    /// T1 error over the true tissue region.
    pub t1_nmse: T,
}

/// Full protocol: acquire both scans, recover PD, then T1 from the PD estimate.
pub fn run_two_scan<T: Real>(
    maps: &TissueMaps<T>,
    protocol: &ScanProtocol<T>,
    psi: &AnalysisOperator,
    cfg: &PipelineConfig<T>,
) -> Result<TwoScanResult<T>> {
    protocol.validate_for(maps)?;
    let (rows, cols) = (maps.rows(), maps.cols());
    let pd_mask = SamplingMask::generate(
        rows,
        cols,
        protocol.pd_fraction,
        protocol.density_power,
        protocol.pd_mask_seed,
    )?;
    let t1_mask = SamplingMask::generate(
        rows,
        cols,
        protocol.t1_fraction,
        protocol.density_power,
        protocol.t1_mask_seed,
    )?;
    let y_pd = acquire(maps, protocol.tr_pd, &pd_mask, protocol.noise_sigma, protocol.pd_noise_seed)?;
    let y_t1 = acquire(maps, protocol.tr_t1, &t1_mask, protocol.noise_sigma, protocol.t1_noise_seed)?;

    let (pd_estimate, pd_trace) = recover_pd(&y_pd, &pd_mask, psi, &cfg.pd)?;
    let t1 = recover_t1(&y_t1, &t1_mask, pd_estimate.view(), protocol.tr_t1, psi, &cfg.t1)?;

    let pd_nmse = nmse(maps.pd().view(), pd_estimate.view())?;
    let t1_nmse = nmse_in(maps.t1().view(), t1.t1.view(), &maps.foreground())?;
    Ok(TwoScanResult {
        pd_mask,
        t1_mask,
        pd_estimate,
        pd_trace,
        t1,
        pd_nmse,
        t1_nmse,
    })
}
