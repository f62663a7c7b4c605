//! Sparsifying analysis operators `Ψ` and their adjoints.
//!
//! Every operator is matrix-free: [`AnalysisOperator::analyze`] computes `Ψx`
//! and [`AnalysisOperator::synthesize`] computes `Ψᵀz`. Small instances can be
//! materialized with [`AnalysisOperator::to_dense`] for oracle checks.
//!
//! * `Identity` – `Ψ = I`.
//! * `FiniteDifference2d` – horizontal and vertical forward differences with a
//!   zero difference on the last column/row (Neumann boundary). Coefficients
//!   are stacked `[horizontal; vertical]`, so `Ψx` has `2·rows·cols` entries.
//! * `HaarWavelet` – orthonormal multi-level Haar transform in Mallat layout,
//!   1-D for vector shapes and separable 2-D for grids. The number of levels
//!   defaults to the number of times the dimensions can be halved evenly.

use ndarray::{Array1, Array2, ArrayView1};
use std::fmt;

use crate::error::{check_len, Error, Result};
use crate::linalg::{self, LinearOperator};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransformKind {
    Identity,
    FiniteDifference2d,
    HaarWavelet,
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransformKind::Identity => "identity",
            TransformKind::FiniteDifference2d => "finite-difference-2d",
            TransformKind::HaarWavelet => "haar-wavelet",
        })
    }
}

/// Shape of the signal an operator acts on. Grids are stored row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignalShape {
    Vector(usize),
    Grid { rows: usize, cols: usize },
}

impl SignalShape {
    pub fn len(&self) -> usize {
        match *self {
            SignalShape::Vector(n) => n,
            SignalShape::Grid { rows, cols } => rows * cols,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalysisOperator {
    kind: TransformKind,
    shape: SignalShape,
    levels: usize,
}

const DENSE_LIMIT: usize = 4096;

fn even_halvings(mut n: usize) -> usize {
    let mut levels = 0;
    while n >= 2 && n % 2 == 0 {
        n /= 2;
        levels += 1;
    }
    levels
}

impl AnalysisOperator {
    pub fn identity(shape: SignalShape) -> Self {
        AnalysisOperator {
            kind: TransformKind::Identity,
            shape,
            levels: 0,
        }
    }

    pub fn finite_difference_2d(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::param("shape", "grid dimensions must be positive"));
        }
        Ok(AnalysisOperator {
            kind: TransformKind::FiniteDifference2d,
            shape: SignalShape::Grid { rows, cols },
            levels: 0,
        })
    }

    /// Haar transform with as many levels as the shape allows.
    pub fn haar(shape: SignalShape) -> Result<Self> {
        let levels = match shape {
            SignalShape::Vector(n) => even_halvings(n),
            SignalShape::Grid { rows, cols } => even_halvings(rows).min(even_halvings(cols)),
        };
        Self::haar_with_levels(shape, levels)
    }

    pub fn haar_with_levels(shape: SignalShape, levels: usize) -> Result<Self> {
        if shape.is_empty() {
            return Err(Error::param("shape", "signal must be non-empty"));
        }
        let fits = |n: usize| n % (1usize << levels.min(63)) == 0;
        let ok = match shape {
            SignalShape::Vector(n) => fits(n),
            SignalShape::Grid { rows, cols } => fits(rows) && fits(cols),
        };
        if !ok {
            return Err(Error::param(
                "levels",
                format!("{levels} Haar levels do not divide shape {shape:?}"),
            ));
        }
        Ok(AnalysisOperator {
            kind: TransformKind::HaarWavelet,
            shape,
            levels,
        })
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn shape(&self) -> SignalShape {
        self.shape
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn input_len(&self) -> usize {
        self.shape.len()
    }

    /// True when `ΨΨᵀ = I` (identity and Haar), so `Ψ(Ψᵀz) = z`.
    pub fn is_orthonormal(&self) -> bool {
        matches!(self.kind, TransformKind::Identity | TransformKind::HaarWavelet)
    }

    pub fn coeff_len(&self) -> usize {
        match self.kind {
            TransformKind::FiniteDifference2d => 2 * self.shape.len(),
            TransformKind::Identity | TransformKind::HaarWavelet => self.shape.len(),
        }
    }

    /// `Ψx`.
    pub fn analyze<T: Real>(&self, x: ArrayView1<T>) -> Result<Array1<T>> {
        check_len("analyze", self.input_len(), x.len())?;
        Ok(match self.kind {
            TransformKind::Identity => x.to_owned(),
            TransformKind::FiniteDifference2d => {
                let (rows, cols) = self.grid();
                fd_forward(x, rows, cols)
            }
            TransformKind::HaarWavelet => {
                let mut out = x.to_owned();
                match self.shape {
                    SignalShape::Vector(n) => haar_1d_forward(
                        out.as_slice_mut().expect("contiguous"),
                        n,
                        self.levels,
                    ),
                    SignalShape::Grid { rows, cols } => haar_2d_forward(
                        out.as_slice_mut().expect("contiguous"),
                        rows,
                        cols,
                        self.levels,
                    ),
                }
                out
            }
        })
    }

    /// `Ψᵀz`.
    pub fn synthesize<T: Real>(&self, z: ArrayView1<T>) -> Result<Array1<T>> {
        check_len("synthesize", self.coeff_len(), z.len())?;
        Ok(match self.kind {
            TransformKind::Identity => z.to_owned(),
            TransformKind::FiniteDifference2d => {
                let (rows, cols) = self.grid();
                fd_adjoint(z, rows, cols)
            }
            TransformKind::HaarWavelet => {
                let mut out = z.to_owned();
                match self.shape {
                    SignalShape::Vector(n) => haar_1d_inverse(
                        out.as_slice_mut().expect("contiguous"),
                        n,
                        self.levels,
                    ),
                    SignalShape::Grid { rows, cols } => haar_2d_inverse(
                        out.as_slice_mut().expect("contiguous"),
                        rows,
                        cols,
                        self.levels,
                    ),
                }
                out
            }
        })
    }

    /// Largest eigenvalue of `ΨΨᵀ` by seeded power iteration.
    pub fn gram_norm<T: Real>(&self, iters: usize, seed: u64) -> Result<T> {
        linalg::gram_norm::<T, _>(self, iters, seed)
    }

    /// Dense `coeff_len × input_len` matrix of `Ψ`, for small operators only.
    pub fn to_dense<T: Real>(&self) -> Result<Array2<T>> {
        let n = self.input_len();
        if n > DENSE_LIMIT {
            return Err(Error::param(
                "shape",
                format!("dense materialization limited to {DENSE_LIMIT} unknowns, got {n}"),
            ));
        }
        let mut dense = Array2::zeros((self.coeff_len(), n));
        let mut e = Array1::<T>::zeros(n);
        for j in 0..n {
            e[j] = T::one();
            dense.column_mut(j).assign(&self.analyze(e.view())?);
            e[j] = T::zero();
        }
        Ok(dense)
    }

    fn grid(&self) -> (usize, usize) {
        match self.shape {
            SignalShape::Grid { rows, cols } => (rows, cols),
            SignalShape::Vector(n) => (1, n),
        }
    }
}

impl<T: Real> LinearOperator<T> for AnalysisOperator {
    fn input_len(&self) -> usize {
        AnalysisOperator::input_len(self)
    }

    fn output_len(&self) -> usize {
        self.coeff_len()
    }

    fn apply(&self, x: ArrayView1<T>) -> Result<Array1<T>> {
        self.analyze(x)
    }

    fn apply_adjoint(&self, y: ArrayView1<T>) -> Result<Array1<T>> {
        self.synthesize(y)
    }
}

fn fd_forward<T: Real>(x: ArrayView1<T>, rows: usize, cols: usize) -> Array1<T> {
    let n = rows * cols;
    let mut out = Array1::zeros(2 * n);
    for i in 0..rows {
        for j in 0..cols {
            let k = i * cols + j;
            if j + 1 < cols {
                out[k] = x[k + 1] - x[k];
            }
            if i + 1 < rows {
                out[n + k] = x[k + cols] - x[k];
            }
        }
    }
    out
}

fn fd_adjoint<T: Real>(z: ArrayView1<T>, rows: usize, cols: usize) -> Array1<T> {
    let n = rows * cols;
    let mut out = Array1::zeros(n);
    for i in 0..rows {
        for j in 0..cols {
            let k = i * cols + j;
            if j + 1 < cols {
                out[k + 1] += z[k];
                out[k] -= z[k];
            }
            if i + 1 < rows {
                out[k + cols] += z[n + k];
                out[k] -= z[n + k];
            }
        }
    }
    out
}

// One orthonormal Haar analysis step on the first `len` entries of `data`,
// read with stride `stride`: averages go to the first half, details to the second.
fn haar_step<T: Real>(data: &mut [T], offset: usize, stride: usize, len: usize, buf: &mut Vec<T>) {
    let s = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    let half = len / 2;
    buf.clear();
    buf.resize(len, T::zero());
    for i in 0..half {
        let a = data[offset + 2 * i * stride];
        let b = data[offset + (2 * i + 1) * stride];
        buf[i] = (a + b) * s;
        buf[half + i] = (a - b) * s;
    }
    for (i, &v) in buf.iter().enumerate() {
        data[offset + i * stride] = v;
    }
}

fn haar_step_inverse<T: Real>(
    data: &mut [T],
    offset: usize,
    stride: usize,
    len: usize,
    buf: &mut Vec<T>,
) {
    let s = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    let half = len / 2;
    buf.clear();
    buf.resize(len, T::zero());
    for i in 0..half {
        let a = data[offset + i * stride];
        let d = data[offset + (half + i) * stride];
        buf[2 * i] = (a + d) * s;
        buf[2 * i + 1] = (a - d) * s;
    }
    for (i, &v) in buf.iter().enumerate() {
        data[offset + i * stride] = v;
    }
}

fn haar_1d_forward<T: Real>(data: &mut [T], n: usize, levels: usize) {
    let mut buf = Vec::with_capacity(n);
    let mut len = n;
    for _ in 0..levels {
        haar_step(data, 0, 1, len, &mut buf);
        len /= 2;
    }
}

fn haar_1d_inverse<T: Real>(data: &mut [T], n: usize, levels: usize) {
    let mut buf = Vec::with_capacity(n);
    for level in (0..levels).rev() {
        haar_step_inverse(data, 0, 1, n >> level, &mut buf);
    }
}

fn haar_2d_forward<T: Real>(data: &mut [T], rows: usize, cols: usize, levels: usize) {
    let mut buf = Vec::with_capacity(rows.max(cols));
    let (mut r, mut c) = (rows, cols);
    for _ in 0..levels {
        for i in 0..r {
            haar_step(data, i * cols, 1, c, &mut buf);
        }
        for j in 0..c {
            haar_step(data, j, cols, r, &mut buf);
        }
        r /= 2;
        c /= 2;
    }
}

fn haar_2d_inverse<T: Real>(data: &mut [T], rows: usize, cols: usize, levels: usize) {
    let mut buf = Vec::with_capacity(rows.max(cols));
    for level in (0..levels).rev() {
        let (r, c) = (rows >> level, cols >> level);
        for j in 0..c {
            haar_step_inverse(data, j, cols, r, &mut buf);
        }
        for i in 0..r {
            haar_step_inverse(data, i * cols, 1, c, &mut buf);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::gaussian_vector;
    use ndarray::array;

    fn all_ops() -> Vec<AnalysisOperator> {
        vec![
            AnalysisOperator::identity(SignalShape::Vector(12)),
            AnalysisOperator::identity(SignalShape::Grid { rows: 5, cols: 3 }),
            AnalysisOperator::finite_difference_2d(6, 5).unwrap(),
            AnalysisOperator::finite_difference_2d(1, 7).unwrap(),
            AnalysisOperator::haar(SignalShape::Vector(100)).unwrap(),
            AnalysisOperator::haar(SignalShape::Grid { rows: 8, cols: 8 }).unwrap(),
            AnalysisOperator::haar(SignalShape::Grid { rows: 12, cols: 8 }).unwrap(),
        ]
    }

    #[test]
    fn identity_is_passthrough() {
        let op = AnalysisOperator::identity(SignalShape::Vector(3));
        let x = array![1.0, -2.0, 3.0];
        assert_eq!(op.analyze(x.view()).unwrap(), x);
        let z = array![5.0, 0.0, -1.0];
        assert_eq!(op.synthesize(z.view()).unwrap(), z);
    }

    #[test]
    fn finite_difference_of_constant_is_zero() {
        let op = AnalysisOperator::finite_difference_2d(4, 4).unwrap();
        let x = Array1::from_elem(16, 2.5f64);
        let c = op.analyze(x.view()).unwrap();
        assert_eq!(c.len(), 32);
        assert!(c.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_coefficients_synthesize_to_zero() {
        for op in all_ops() {
            let z = Array1::<f64>::zeros(op.coeff_len());
            assert!(op.synthesize(z.view()).unwrap().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn finite_difference_adjoint_of_impulse_matches_dense_transpose() {
        let op = AnalysisOperator::finite_difference_2d(3, 3).unwrap();
        let dense: Array2<f64> = op.to_dense().unwrap();
        // horizontal coefficient at (1,1) couples pixels (1,1) and (1,2)
        let mut z = Array1::<f64>::zeros(18);
        z[4] = 1.0;
        let adj = op.synthesize(z.view()).unwrap();
        assert_eq!(adj, dense.t().dot(&z));
        let mut expected = Array1::<f64>::zeros(9);
        expected[4] = -1.0;
        expected[5] = 1.0;
        assert_eq!(adj, expected);
        // boundary coefficient (last column) is structurally zero
        let mut zb = Array1::<f64>::zeros(18);
        zb[5] = 1.0;
        assert!(op.synthesize(zb.view()).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn haar_round_trip_against_dense_matrix() {
        let op = AnalysisOperator::haar(SignalShape::Grid { rows: 8, cols: 8 }).unwrap();
        assert_eq!(op.levels(), 3);
        let dense: Array2<f64> = op.to_dense().unwrap();
        // orthonormal: ΨᵀΨ = I
        let gram = dense.t().dot(&dense);
        for i in 0..64 {
            for j in 0..64 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((gram[[i, j]] - e).abs() < 1e-12);
            }
        }
        let x: Array1<f64> = gaussian_vector(64, 3);
        let coeffs = op.analyze(x.view()).unwrap();
        let via_dense = dense.dot(&x);
        for (a, b) in coeffs.iter().zip(via_dense.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        let back = op.synthesize(coeffs.view()).unwrap();
        for (a, b) in back.iter().zip(x.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn haar_vector_of_length_100_uses_two_levels() {
        let op = AnalysisOperator::haar(SignalShape::Vector(100)).unwrap();
        assert_eq!(op.levels(), 2);
        assert_eq!(op.coeff_len(), 100);
    }

    #[test]
    fn haar_rejects_indivisible_levels() {
        assert!(AnalysisOperator::haar_with_levels(SignalShape::Vector(12), 3).is_err());
        assert!(AnalysisOperator::haar_with_levels(SignalShape::Vector(12), 2).is_ok());
    }

    #[test]
    fn shape_mismatch_is_dimension_error() {
        let op = AnalysisOperator::finite_difference_2d(3, 3).unwrap();
        let err = op.analyze(Array1::<f64>::zeros(8).view()).unwrap_err();
        assert!(matches!(err, Error::Dimension { .. }));
        let err = op.synthesize(Array1::<f64>::zeros(9).view()).unwrap_err();
        assert!(matches!(err, Error::Dimension { .. }));
    }

    #[test]
    fn adjoint_identity_holds() {
        for op in all_ops() {
            for trial in 0..20u64 {
                let x: Array1<f64> = gaussian_vector(op.input_len(), trial);
                let z: Array1<f64> = gaussian_vector(op.coeff_len(), 1000 + trial);
                let lhs = op.analyze(x.view()).unwrap().dot(&z);
                let rhs = x.dot(&op.synthesize(z.view()).unwrap());
                let scale = linalg::norm2(x.view()) * linalg::norm2(z.view());
                assert!((lhs - rhs).abs() <= 1e-10 * scale, "{:?}", op.kind());
            }
        }
    }

    #[test]
    fn gram_norms() {
        let haar = AnalysisOperator::haar(SignalShape::Grid { rows: 16, cols: 16 }).unwrap();
        let h: f64 = haar.gram_norm(100, 5).unwrap();
        assert!((h - 1.0).abs() < 1e-8);
        let fd = AnalysisOperator::finite_difference_2d(16, 16).unwrap();
        let a: f64 = fd.gram_norm(100, 5).unwrap();
        let b: f64 = fd.gram_norm(100, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.is_finite() && a > 4.0 && a <= 8.0);
    }

    #[test]
    fn works_in_single_precision() {
        let op = AnalysisOperator::haar(SignalShape::Vector(16)).unwrap();
        let x: Array1<f32> = gaussian_vector(16, 9);
        let back = op.synthesize(op.analyze(x.view()).unwrap().view()).unwrap();
        for (a, b) in back.iter().zip(x.iter()) {
            assert!((a - b).abs() < 1e-5);
        }
    }
}
