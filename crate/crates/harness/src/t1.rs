//! Two-scan PD / T1 mapping experiment over several K-space splits.

use ndarray::Array1;
use serde::Serialize;

use nlsparse::measurements::FourierSampler;
use nlsparse::mri::{
    acquire, make_phantom, nmse, nmse_in, recover_pd, recover_t1, PhantomKind, ScanProtocol,
    TissueMaps, BACKGROUND_PD_FRACTION,
};
use nlsparse::{AnalysisOperator, LinearOperator, MeasurementModel, SamplingMask, SignalShape, SolverConfig};

use crate::config::{ExperimentSpec, StageSpec};
use crate::manifest::TrialSeed;
use crate::seeds::derive_seed;
use crate::{HarnessError, Result};

/// One line of the PD / T1 error table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct T1Row {
    pub split: String,
    pub pd_fraction: f64,
    pub t1_fraction: f64,
    pub pd_nmse: f64,
    pub t1_nmse: f64,
    pub pd_iterations: usize,
    pub t1_iterations: usize,
    pub excluded_pixels: usize,
}

#[derive(Debug, Clone)]
pub struct SplitResult {
    pub row: T1Row,
    pub pd_estimate: Array1<f64>,
    pub t1_estimate: Array1<f64>,
}

#[derive(Debug, Clone)]
pub struct T1Report {
    pub maps: TissueMaps<f64>,
    pub splits: Vec<SplitResult>,
    pub seeds: Vec<TrialSeed>,
}

impl T1Report {
    pub fn rows(&self) -> Vec<T1Row> {
        self.splits.iter().map(|s| s.row.clone()).collect()
    }
}

pub fn split_label(pd: f64, t1: f64) -> String {
    format!("{}/{}", (pd * 100.0).round(), (t1 * 100.0).round())
}

pub fn phantom_from_name(name: &str, seed: u64) -> Result<PhantomKind> {
    match name {
        "shepp-logan" => Ok(PhantomKind::SheppLogan),
        "blocks" => Ok(PhantomKind::Blocks { seed }),
        other => Err(HarnessError::Config(format!(
            "unknown phantom `{other}` (expected shepp-logan or blocks)"
        ))),
    }
}

pub fn transform_from_name(name: &str, rows: usize, cols: usize) -> Result<AnalysisOperator> {
    match name {
        "finite-difference" | "tv" => Ok(AnalysisOperator::finite_difference_2d(rows, cols)?),
        "haar" => Ok(AnalysisOperator::haar(SignalShape::Grid { rows, cols })?),
        "identity" => Ok(AnalysisOperator::identity(SignalShape::Grid { rows, cols })),
        other => Err(HarnessError::Config(format!(
            "unknown transform `{other}` (expected finite-difference, haar or identity)"
        ))),
    }
}

fn stage_config(stage: &StageSpec, lambda: f64) -> SolverConfig<f64> {
    let mut cfg = SolverConfig::with_lambda(lambda);
    cfg.max_outer_iters = stage.max_iters;
    cfg.tol = stage.tol;
    cfg.inner_z_iters = stage.inner_z_iters;
    cfg
}

fn max_abs(v: &Array1<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// PD and T1 recovery for one split of the K-space budget.
pub fn run_split(
    maps: &TissueMaps<f64>,
    spec: &ExperimentSpec,
    pd_fraction: f64,
    t1_fraction: f64,
    seed: u64,
) -> Result<SplitResult> {
    let t1s = &spec.t1;
    let (rows, cols) = (maps.rows(), maps.cols());
    let mut protocol = ScanProtocol::for_maps(maps, pd_fraction, t1_fraction, seed)?;
    protocol.noise_sigma = t1s.noise_sigma;
    protocol.density_power = t1s.density_power;
    protocol.validate_for(maps)?;

    let pd_mask = SamplingMask::generate(rows, cols, pd_fraction, protocol.density_power, protocol.pd_mask_seed)?;
    let t1_mask = SamplingMask::generate(rows, cols, t1_fraction, protocol.density_power, protocol.t1_mask_seed)?;
    let y_pd = acquire(maps, protocol.tr_pd, &pd_mask, protocol.noise_sigma, protocol.pd_noise_seed)?;
    let y_t1 = acquire(maps, protocol.tr_t1, &t1_mask, protocol.noise_sigma, protocol.t1_noise_seed)?;

    // PD: λ relative to ‖Ψ∇‖∞ at ρ = 0, i.e. ‖Ψ 2Aᵀy‖∞.
    let psi_pd = transform_from_name(&t1s.pd.transform, rows, cols)?;
    let sampler = FourierSampler::<f64>::new(pd_mask.clone())?;
    let back = sampler.apply_adjoint(y_pd.to_stacked().view())? * 2.0;
    let pd_scale = max_abs(&psi_pd.analyze(back.view())?);
    let (pd_estimate, pd_trace) = recover_pd(&y_pd, &pd_mask, &psi_pd, &stage_config(&t1s.pd, t1s.pd.lambda_rel * pd_scale))?;

    // T1: same model as the solver sees, so the scale matches its starting point.
    let psi_t1 = transform_from_name(&t1s.t1.transform, rows, cols)?;
    let peak = pd_estimate.iter().copied().fold(0.0, f64::max);
    let threshold = peak * BACKGROUND_PD_FRACTION;
    let support: Vec<bool> = pd_estimate.iter().map(|&p| peak > 0.0 && p >= threshold).collect();
    let rho = pd_estimate.mapv(|p| if p >= threshold { p } else { 0.0 });
    let model = MeasurementModel::fourier_mri(t1_mask.clone(), rho)?.with_support(support)?;
    let z0 = Array1::<f64>::ones(rows * cols);
    let t1_scale = crate::continuation::lambda_scale(&model, &y_t1, &psi_t1, z0.view())?;
    let t1_est = recover_t1(
        &y_t1,
        &t1_mask,
        pd_estimate.view(),
        protocol.tr_t1,
        &psi_t1,
        &stage_config(&t1s.t1, t1s.t1.lambda_rel * t1_scale),
    )?;

    let pd_nmse = nmse(maps.pd().view(), pd_estimate.view())?;
    let t1_nmse = nmse_in(maps.t1().view(), t1_est.t1.view(), &maps.foreground())?;
    Ok(SplitResult {
        row: T1Row {
            split: split_label(pd_fraction, t1_fraction),
            pd_fraction,
            t1_fraction,
            pd_nmse,
            t1_nmse,
            pd_iterations: pd_trace.iterations,
            t1_iterations: t1_est.trace.iterations,
            excluded_pixels: t1_est.excluded(),
        },
        pd_estimate,
        t1_estimate: t1_est.t1,
    })
}

/// Runs every configured split on the configured phantom. Masks and noise for
/// a split derive from the master seed and the split fractions only.
pub fn run_t1_pipeline(spec: &ExperimentSpec) -> Result<T1Report> {
    spec.validate()?;
    let phantom_seed = derive_seed(spec.seed, "phantom", &[]);
    let kind = phantom_from_name(&spec.t1.phantom, phantom_seed)?;
    let maps: TissueMaps<f64> = make_phantom(kind, spec.t1.size)?;
    let mut report = run_on_maps(maps, spec)?;
    report.seeds.insert(0, TrialSeed::new("phantom", phantom_seed));
    Ok(report)
}

/// Runs every configured split on the given maps.
pub fn run_on_maps(maps: TissueMaps<f64>, spec: &ExperimentSpec) -> Result<T1Report> {
    let mut seeds = Vec::new();
    let mut splits = Vec::new();
    for &[pd, t1] in &spec.t1.splits {
        let per_mille = |f: f64| (f * 1000.0).round() as u64;
        let seed = derive_seed(spec.seed, "t1-pipeline", &[per_mille(pd), per_mille(t1)]);
        seeds.push(TrialSeed::new(format!("t1-pipeline/{}", split_label(pd, t1)), seed));
        splits.push(run_split(&maps, spec, pd, t1, seed)?);
    }
    Ok(T1Report { maps, splits, seeds })
}
