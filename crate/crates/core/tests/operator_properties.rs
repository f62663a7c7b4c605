//! Randomized linearity and adjoint checks for every analysis operator and for
//! the Jacobians of the measurement models.

use ndarray::{Array1, Array2};
use nlsparse::linalg::gaussian_vector;
use nlsparse::{AnalysisOperator, MeasurementModel, SamplingMask, SignalShape};
use proptest::prelude::*;

fn operators() -> Vec<AnalysisOperator> {
    vec![
        AnalysisOperator::identity(SignalShape::Vector(12)),
        AnalysisOperator::identity(SignalShape::Grid { rows: 4, cols: 6 }),
        AnalysisOperator::finite_difference_2d(5, 7).unwrap(),
        AnalysisOperator::finite_difference_2d(1, 9).unwrap(),
        AnalysisOperator::haar(SignalShape::Vector(100)).unwrap(),
        AnalysisOperator::haar(SignalShape::Grid { rows: 8, cols: 8 }).unwrap(),
        AnalysisOperator::haar(SignalShape::Grid { rows: 12, cols: 4 }).unwrap(),
    ]
}

fn rel_close(a: f64, b: f64, scale: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * scale.max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn analyze_is_linear(seed in any::<u64>(), a in -3.0..3.0f64, b in -3.0..3.0f64) {
        for op in operators() {
            let n = op.input_len();
            let x: Array1<f64> = gaussian_vector(n, seed);
            let y: Array1<f64> = gaussian_vector(n, seed ^ 0x5555);
            let lhs = op.analyze((&x * a + &y * b).view()).unwrap();
            let rhs = op.analyze(x.view()).unwrap() * a + op.analyze(y.view()).unwrap() * b;
            let scale = lhs.dot(&lhs).sqrt().max(1.0);
            let err = (&lhs - &rhs).dot(&(&lhs - &rhs)).sqrt();
            prop_assert!(err <= 1e-12 * scale, "{:?}: {err}", op.kind());
        }
    }

    #[test]
    fn synthesize_is_the_adjoint(seed in any::<u64>()) {
        for op in operators() {
            let x: Array1<f64> = gaussian_vector(op.input_len(), seed);
            let z: Array1<f64> = gaussian_vector(op.coeff_len(), seed.wrapping_add(1));
            let lhs = op.analyze(x.view()).unwrap().dot(&z);
            let rhs = x.dot(&op.synthesize(z.view()).unwrap());
            let scale = x.dot(&x).sqrt() * z.dot(&z).sqrt();
            prop_assert!(rel_close(lhs, rhs, scale, 1e-10), "{:?}: {lhs} vs {rhs}", op.kind());
        }
    }

    #[test]
    fn matrix_jacobians_are_adjoint(seed in any::<u64>()) {
        let a = Array2::from_shape_vec((7, 5), gaussian_vector::<f64>(35, seed).to_vec()).unwrap();
        let x: Array1<f64> = gaussian_vector(5, seed ^ 1) * 0.3;
        for model in [MeasurementModel::linear(a.clone()), MeasurementModel::exponential(a.clone())] {
            let v: Array1<f64> = gaussian_vector(5, seed ^ 2);
            let r: Array1<f64> = gaussian_vector(7, seed ^ 3);
            let jv = model.jacobian_apply(x.view(), v.view()).unwrap();
            let jtr = model
                .jacobian_adjoint(x.view(), &nlsparse::MeasurementVector::Real(r.clone()))
                .unwrap();
            let (lhs, rhs) = (jv.dot(&r), v.dot(&jtr));
            let scale = jv.dot(&jv).sqrt() * r.dot(&r).sqrt();
            prop_assert!(rel_close(lhs, rhs, scale, 1e-10));
        }
    }
}

#[test]
fn fourier_jacobian_is_adjoint_in_the_real_inner_product() {
    let mask = SamplingMask::generate(8, 8, 0.5, 3.0, 9).unwrap();
    let rho: Array1<f64> = gaussian_vector::<f64>(64, 4).mapv(f64::abs);
    let model = MeasurementModel::fourier_mri(mask, rho).unwrap();
    let z: Array1<f64> = gaussian_vector::<f64>(64, 5).mapv(|v| 1.0 + 0.3 * v);
    for seed in 0..10 {
        let v: Array1<f64> = gaussian_vector(64, 100 + seed);
        let jv = model.jacobian_apply(z.view(), v.view()).unwrap();
        // a random complex residual, interleaved as [re, im, …]
        let r: Array1<f64> = gaussian_vector(jv.len(), 200 + seed);
        let jtr = model
            .jacobian_adjoint(z.view(), &stacked_to_complex(&r))
            .unwrap();
        let (lhs, rhs) = (jv.dot(&r), v.dot(&jtr));
        let scale = jv.dot(&jv).sqrt() * r.dot(&r).sqrt();
        assert!(rel_close(lhs, rhs, scale, 1e-10), "{lhs} vs {rhs}");
    }
}

fn stacked_to_complex(r: &Array1<f64>) -> nlsparse::MeasurementVector<f64> {
    nlsparse::MeasurementVector::Complex(
        (0..r.len() / 2)
            .map(|i| num_complex::Complex::new(r[2 * i], r[2 * i + 1]))
            .collect(),
    )
}

#[test]
fn power_iteration_is_reproducible_and_exact_for_haar() {
    for op in operators() {
        let a: f64 = op.gram_norm(100, 7).unwrap();
        let b: f64 = op.gram_norm(100, 7).unwrap();
        assert!(a.is_finite() && (a - b).abs() <= 1e-6 * a);
        if op.is_orthonormal() {
            assert!((a - 1.0).abs() <= 1e-8, "{:?}: {a}", op.kind());
        }
    }
}
