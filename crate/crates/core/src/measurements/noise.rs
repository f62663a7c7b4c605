use ndarray::Array1;
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::model::MeasurementVector;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Adds i.i.d. zero-mean Gaussian noise of standard deviation `noise_sigma`.
/// Complex samples receive independent real and imaginary parts of standard
/// deviation `noise_sigma/√2` each, so `E|η|² = σ²` per sample.
pub fn add_noise<T: Real>(
    y: &MeasurementVector<T>,
    noise_sigma: T,
    seed: u64,
) -> Result<MeasurementVector<T>> {
    if !(noise_sigma >= T::zero()) || !noise_sigma.is_finite() {
        return Err(Error::param(
            "noise_sigma",
            format!("{noise_sigma} must be finite and non-negative"),
        ));
    }
    if noise_sigma == T::zero() {
        return Ok(y.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |scale: T| {
        let v: f64 = StandardNormal.sample(&mut rng);
        T::lit(v) * scale
    };
    Ok(match y {
        MeasurementVector::Real(v) => {
            MeasurementVector::Real(v.iter().map(|&e| e + draw(noise_sigma)).collect::<Array1<T>>())
        }
        MeasurementVector::Complex(v) => {
            let s = noise_sigma / T::two().sqrt();
            MeasurementVector::Complex(
                v.iter()
                    .map(|&c| {
                        let re = draw(s);
                        let im = draw(s);
                        c + Complex::new(re, im)
                    })
                    .collect(),
            )
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_sigma_is_identity() {
        let y = MeasurementVector::Real(Array1::from(vec![1.0, 2.0]));
        assert_eq!(add_noise(&y, 0.0, 3).unwrap(), y);
    }

    #[test]
    fn negative_sigma_rejected() {
        let y = MeasurementVector::Real(Array1::from(vec![1.0]));
        assert!(matches!(add_noise(&y, -1.0, 3), Err(Error::Parameter { .. })));
    }

    #[test]
    fn sample_standard_deviation() {
        let y = MeasurementVector::Real(Array1::<f64>::zeros(100_000));
        let noisy = add_noise(&y, 1.0, 17).unwrap();
        let v = noisy.as_real().unwrap();
        let mean = v.sum() / v.len() as f64;
        let var = v.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
        let sd = var.sqrt();
        assert!((0.99..=1.01).contains(&sd), "sd = {sd}");
    }

    #[test]
    fn complex_noise_splits_variance() {
        let y = MeasurementVector::Complex(Array1::from_elem(50_000, Complex::new(0.0f64, 0.0)));
        let noisy = add_noise(&y, 2.0, 5).unwrap();
        let power = noisy.norm_sqr() / 50_000.0;
        assert!((power - 4.0).abs() < 0.1, "power = {power}");
    }

    #[test]
    fn deterministic_given_seed() {
        let y = MeasurementVector::Real(Array1::<f64>::zeros(32));
        assert_eq!(add_noise(&y, 0.5, 9).unwrap(), add_noise(&y, 0.5, 9).unwrap());
    }
}
