//! Unitary 2-D DFT and the masked Fourier sampling operator `RF`.

use std::fmt;
use std::sync::Arc;

use ndarray::{Array1, ArrayView1};
use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::mask::SamplingMask;
use crate::error::{check_len, Error, Result};
use crate::linalg::LinearOperator;
use crate::scalar::Real;

/// Unitary 2-D discrete Fourier transform on a row-major grid, scaled by
/// `1/√N` in both directions so that `‖Fx‖ = ‖x‖`. The zero frequency sits
/// at index `(0, 0)`.
#[derive(Clone)]
pub struct Fft2<T: Real> {
    rows: usize,
    cols: usize,
    row_fwd: Arc<dyn Fft<T>>,
    row_inv: Arc<dyn Fft<T>>,
    col_fwd: Arc<dyn Fft<T>>,
    col_inv: Arc<dyn Fft<T>>,
    scale: T,
}

impl<T: Real> fmt::Debug for Fft2<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fft2")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .finish()
    }
}

impl<T: Real> Fft2<T> {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::param("shape", "grid dimensions must be positive"));
        }
        let mut planner = FftPlanner::new();
        Ok(Fft2 {
            rows,
            cols,
            row_fwd: planner.plan_fft_forward(cols),
            row_inv: planner.plan_fft_inverse(cols),
            col_fwd: planner.plan_fft_forward(rows),
            col_inv: planner.plan_fft_inverse(rows),
            scale: T::one() / T::lit((rows * cols) as f64).sqrt(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn forward(&self, data: &mut [Complex<T>]) -> Result<()> {
        self.transform(data, &self.row_fwd, &self.col_fwd)
    }

    pub fn inverse(&self, data: &mut [Complex<T>]) -> Result<()> {
        self.transform(data, &self.row_inv, &self.col_inv)
    }

    fn transform(
        &self,
        data: &mut [Complex<T>],
        row_plan: &Arc<dyn Fft<T>>,
        col_plan: &Arc<dyn Fft<T>>,
    ) -> Result<()> {
        check_len("fft2", self.len(), data.len())?;
        let (rows, cols) = (self.rows, self.cols);
        // rustfft processes consecutive chunks of the plan length
        row_plan.process(data);
        let mut transposed = vec![Complex::new(T::zero(), T::zero()); rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                transposed[j * rows + i] = data[i * cols + j];
            }
        }
        col_plan.process(&mut transposed);
        for i in 0..rows {
            for j in 0..cols {
                data[i * cols + j] = transposed[j * rows + i] * self.scale;
            }
        }
        Ok(())
    }
}

/// The sampling operator `RF`: unitary DFT followed by selection of the mask's
/// K-space locations. Measurements are complex, one per selected location, in
/// row-major order of the mask.
#[derive(Debug, Clone)]
pub struct FourierSampler<T: Real> {
    fft: Fft2<T>,
    mask: SamplingMask,
    indices: Vec<usize>,
}

impl<T: Real> FourierSampler<T> {
    pub fn new(mask: SamplingMask) -> Result<Self> {
        let fft = Fft2::new(mask.rows(), mask.cols())?;
        let indices = mask.indices();
        Ok(FourierSampler { fft, mask, indices })
    }

    pub fn mask(&self) -> &SamplingMask {
        &self.mask
    }

    pub fn grid_len(&self) -> usize {
        self.fft.len()
    }

    pub fn sample_count(&self) -> usize {
        self.indices.len()
    }

    pub fn fft(&self) -> &Fft2<T> {
        &self.fft
    }

    /// `RF x` for a real field.
    pub fn sample(&self, x: ArrayView1<T>) -> Result<Array1<Complex<T>>> {
        check_len("fourier sample", self.grid_len(), x.len())?;
        let mut buf: Vec<Complex<T>> = x.iter().map(|&v| Complex::new(v, T::zero())).collect();
        self.fft.forward(&mut buf)?;
        Ok(self.indices.iter().map(|&k| buf[k]).collect())
    }

    /// `Fᴴ Rᵀ y`: zero-filled inverse transform of the measurements.
    pub fn adjoint_complex(&self, y: ArrayView1<Complex<T>>) -> Result<Array1<Complex<T>>> {
        check_len("fourier adjoint", self.sample_count(), y.len())?;
        let mut buf = vec![Complex::new(T::zero(), T::zero()); self.grid_len()];
        for (&k, &v) in self.indices.iter().zip(y.iter()) {
            buf[k] = v;
        }
        self.fft.inverse(&mut buf)?;
        Ok(Array1::from(buf))
    }

    /// `Re{Fᴴ Rᵀ y}`, the adjoint of `RF` restricted to real fields.
    pub fn adjoint(&self, y: ArrayView1<Complex<T>>) -> Result<Array1<T>> {
        Ok(self.adjoint_complex(y)?.mapv(|c| c.re))
    }
}

/// Interleaves complex samples as `[re₀, im₀, re₁, im₁, …]`.
pub fn stack_complex<T: Real>(y: ArrayView1<Complex<T>>) -> Array1<T> {
    y.iter().flat_map(|c| [c.re, c.im]).collect()
}

pub fn unstack_complex<T: Real>(y: ArrayView1<T>) -> Result<Array1<Complex<T>>> {
    if y.len() % 2 != 0 {
        return Err(Error::dim("unstack complex", y.len() + 1, y.len()));
    }
    Ok((0..y.len() / 2)
        .map(|i| Complex::new(y[2 * i], y[2 * i + 1]))
        .collect())
}

/// `RF` as a real operator `R^N -> R^{2m}` on interleaved measurements. With
/// a unitary `F` its transpose is `Re{Fᴴ Rᵀ ·}`.
impl<T: Real> LinearOperator<T> for FourierSampler<T> {
    fn input_len(&self) -> usize {
        self.grid_len()
    }

    fn output_len(&self) -> usize {
        2 * self.sample_count()
    }

    fn apply(&self, x: ArrayView1<T>) -> Result<Array1<T>> {
        Ok(stack_complex(self.sample(x)?.view()))
    }

    fn apply_adjoint(&self, y: ArrayView1<T>) -> Result<Array1<T>> {
        check_len("fourier adjoint", self.output_len(), y.len())?;
        self.adjoint(unstack_complex(y)?.view())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::gaussian_vector;

    fn direct_dft(x: &[f64], rows: usize, cols: usize) -> Vec<Complex<f64>> {
        let n = (rows * cols) as f64;
        let mut out = vec![Complex::new(0.0, 0.0); rows * cols];
        for u in 0..rows {
            for v in 0..cols {
                let mut acc = Complex::new(0.0, 0.0);
                for i in 0..rows {
                    for j in 0..cols {
                        let phase = -2.0
                            * std::f64::consts::PI
                            * ((u * i) as f64 / rows as f64 + (v * j) as f64 / cols as f64);
                        acc += Complex::from_polar(x[i * cols + j], phase);
                    }
                }
                out[u * cols + v] = acc / n.sqrt();
            }
        }
        out
    }

    #[test]
    fn matches_direct_dft_and_is_unitary() {
        let (rows, cols) = (4, 6);
        let x: Array1<f64> = gaussian_vector(rows * cols, 11);
        let fft = Fft2::<f64>::new(rows, cols).unwrap();
        let mut buf: Vec<_> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
        fft.forward(&mut buf).unwrap();
        let reference = direct_dft(x.as_slice().unwrap(), rows, cols);
        for (a, b) in buf.iter().zip(reference.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
        let energy: f64 = buf.iter().map(|c| c.norm_sqr()).sum();
        assert!((energy - x.dot(&x)).abs() < 1e-10);
        fft.inverse(&mut buf).unwrap();
        for (a, b) in buf.iter().zip(x.iter()) {
            assert!((a.re - b).abs() < 1e-12 && a.im.abs() < 1e-12);
        }
    }

    #[test]
    fn sampler_adjoint_identity() {
        let mask = SamplingMask::generate(8, 8, 0.5, 3.0, 4).unwrap();
        let op = FourierSampler::<f64>::new(mask).unwrap();
        for trial in 0..10 {
            let x: Array1<f64> = gaussian_vector(64, trial);
            let y: Array1<f64> = gaussian_vector(op.output_len(), 50 + trial);
            let lhs = op.apply(x.view()).unwrap().dot(&y);
            let rhs = x.dot(&op.apply_adjoint(y.view()).unwrap());
            assert!((lhs - rhs).abs() < 1e-10 * (x.dot(&x) * y.dot(&y)).sqrt());
        }
    }
}
