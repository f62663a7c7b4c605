//! Random sparse-recovery problems for the benchmark experiments.

use ndarray::{Array1, Array2};
use nlsparse::{AnalysisOperator, MeasurementModel, MeasurementVector, ModelKind, SignalShape};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::HarnessError;

/// One benchmark problem: `y = f(x*)` with `Ψx*` exactly `k`-sparse.
#[derive(Debug, Clone)]
pub struct SparseInstance {
    pub kind: ModelKind,
    pub a: Array2<f64>,
    pub x_true: Array1<f64>,
    pub coeffs_true: Array1<f64>,
    pub psi: AnalysisOperator,
    pub model: MeasurementModel<f64>,
    pub y: MeasurementVector<f64>,
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Draws `A` (`m × n`) and `x* = Ψᵀs` with `s` supported on `k` uniformly
/// chosen coefficients carrying standard-normal values; `Ψ` is the 1-D Haar
/// transform of length `n`.
///
/// For the linear and exponential kinds `A` has i.i.d. `N(0, 1/m)` entries.
/// The logarithmic kind needs `Ax* > 0` and a positive image of the all-ones
/// starting point, so its entries are half-normal `|N(0, 1/m)|` and each row
/// is redrawn until `a_iᵀx* ≥ 0.05‖x*‖/√m`.
pub fn sparse_instance(
    kind: ModelKind,
    m: usize,
    n: usize,
    k: usize,
    seed: u64,
) -> Result<SparseInstance, HarnessError> {
    if k == 0 || k >= n {
        return Err(HarnessError::Config(format!("sparsity {k} must be in 1..{n}")));
    }
    if kind == ModelKind::FourierMri {
        return Err(HarnessError::Config(
            "benchmark instances use matrix measurement models".into(),
        ));
    }
    let psi = AnalysisOperator::haar(SignalShape::Vector(n))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (m as f64).sqrt();
    'signal: loop {
        let mut coeffs = Array1::<f64>::zeros(n);
        for idx in sample(&mut rng, n, k) {
            coeffs[idx] = normal(&mut rng);
        }
        let x_true = psi.synthesize(coeffs.view())?;
        let mut a = Array2::<f64>::zeros((m, n));
        if kind == ModelKind::Logarithmic {
            let margin = 0.05 * x_true.dot(&x_true).sqrt() * scale;
            for i in 0..m {
                let mut accepted = false;
                for _ in 0..10_000 {
                    for j in 0..n {
                        a[[i, j]] = normal(&mut rng).abs() * scale;
                    }
                    if a.row(i).dot(&x_true) >= margin {
                        accepted = true;
                        break;
                    }
                }
                if !accepted {
                    continue 'signal;
                }
            }
        } else {
            a.mapv_inplace(|_| normal(&mut rng) * scale);
        }
        let model = MeasurementModel::with_matrix(kind, a.clone())?;
        let y = model.forward(x_true.view())?;
        return Ok(SparseInstance {
            kind,
            a,
            x_true,
            coeffs_true: coeffs,
            psi,
            model,
            y,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_are_reproducible_and_sparse() {
        for kind in [ModelKind::Linear, ModelKind::Exponential, ModelKind::Logarithmic] {
            let a = sparse_instance(kind, 40, 100, 10, 5).unwrap();
            let b = sparse_instance(kind, 40, 100, 10, 5).unwrap();
            assert_eq!(a.x_true, b.x_true);
            assert_eq!(a.y, b.y);
            let coeffs = a.psi.analyze(a.x_true.view()).unwrap();
            let nnz = coeffs.iter().filter(|v| v.abs() > 1e-12).count();
            assert_eq!(nnz, 10);
        }
    }

    #[test]
    fn logarithmic_instances_are_in_domain() {
        let inst = sparse_instance(ModelKind::Logarithmic, 40, 100, 10, 9).unwrap();
        assert!(inst.a.dot(&inst.x_true).iter().all(|&v| v > 0.0));
        assert!(inst.a.dot(&Array1::<f64>::ones(100)).iter().all(|&v| v > 0.0));
    }
}
