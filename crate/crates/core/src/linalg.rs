//! Small dense/matrix-free linear algebra helpers.

use ndarray::{Array1, Array2, ArrayView1};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_len, Result};
use crate::scalar::Real;

/// A real linear map `A: R^n -> R^m` given by its action and the action of its transpose.
pub trait LinearOperator<T: Real> {
    fn input_len(&self) -> usize;
    fn output_len(&self) -> usize;
    fn apply(&self, x: ArrayView1<T>) -> Result<Array1<T>>;
    fn apply_adjoint(&self, y: ArrayView1<T>) -> Result<Array1<T>>;
}

impl<T: Real> LinearOperator<T> for Array2<T> {
    fn input_len(&self) -> usize {
        self.ncols()
    }

    fn output_len(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: ArrayView1<T>) -> Result<Array1<T>> {
        check_len("matrix apply", self.ncols(), x.len())?;
        Ok(self.dot(&x))
    }

    fn apply_adjoint(&self, y: ArrayView1<T>) -> Result<Array1<T>> {
        check_len("matrix adjoint", self.nrows(), y.len())?;
        Ok(mat_t_vec(self, y))
    }
}

/// `Aᵀy` accumulated row by row, which stays contiguous for row-major `A`.
pub fn mat_t_vec<T: Real>(a: &Array2<T>, y: ArrayView1<T>) -> Array1<T> {
    if !a.is_standard_layout() {
        return a.t().dot(&y);
    }
    let mut out = Array1::zeros(a.ncols());
    for (row, &yi) in a.rows().into_iter().zip(y.iter()) {
        out.scaled_add(yi, &row);
    }
    out
}

pub fn norm2<T: Real>(x: ArrayView1<T>) -> T {
    x.iter().fold(T::zero(), |acc, &v| acc + v * v).sqrt()
}

pub fn norm1<T: Real>(x: ArrayView1<T>) -> T {
    x.iter().fold(T::zero(), |acc, &v| acc + v.abs())
}

pub fn dot<T: Real>(a: ArrayView1<T>, b: ArrayView1<T>) -> T {
    a.dot(&b)
}

/// Standard-normal vector from a fixed seed.
pub fn gaussian_vector<T: Real>(n: usize, seed: u64) -> Array1<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array1::from_iter((0..n).map(|_| {
        let v: f64 = StandardNormal.sample(&mut rng);
        T::lit(v)
    }))
}

/// Largest eigenvalue of a symmetric positive semi-definite operator by power
/// iteration with a Rayleigh-quotient estimate. The start vector is drawn from
/// `seed`, so the estimate is reproducible.
pub fn power_iteration<T, F>(n: usize, iters: usize, seed: u64, mut gram: F) -> Result<T>
where
    T: Real,
    F: FnMut(ArrayView1<T>) -> Result<Array1<T>>,
{
    if n == 0 {
        return Ok(T::zero());
    }
    let mut v = gaussian_vector::<T>(n, seed);
    let nv = norm2(v.view());
    v.mapv_inplace(|e| e / nv);
    let mut estimate = T::zero();
    for _ in 0..iters.max(1) {
        let w = gram(v.view())?;
        estimate = dot(v.view(), w.view());
        let nw = norm2(w.view());
        if nw == T::zero() {
            return Ok(T::zero());
        }
        v = w.mapv(|e| e / nw);
    }
    Ok(estimate)
}

/// Largest eigenvalue of `AᵀA`.
pub fn gram_norm<T: Real, Op: LinearOperator<T> + ?Sized>(
    op: &Op,
    iters: usize,
    seed: u64,
) -> Result<T> {
    power_iteration(op.input_len(), iters, seed, |v| {
        let av = op.apply(v)?;
        op.apply_adjoint(av.view())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn power_iteration_on_diagonal() {
        let d = array![1.0, 4.0, 2.5];
        let est: f64 = power_iteration(3, 200, 7, |v| Ok(&v * &d)).unwrap();
        assert!((est - 4.0).abs() < 1e-10);
    }

    #[test]
    fn gram_norm_matches_singular_value() {
        // [[3, 0], [0, 1], [0, 0]] has largest singular value 3.
        let a = array![[3.0, 0.0], [0.0, 1.0], [0.0, 0.0]];
        let est: f64 = gram_norm(&a, 100, 1).unwrap();
        assert!((est - 9.0).abs() < 1e-10);
    }

    #[test]
    fn dense_operator_checks_lengths() {
        let a = Array2::<f64>::zeros((2, 3));
        assert!(a.apply(array![1.0, 2.0].view()).is_err());
        assert!(a.apply_adjoint(array![1.0, 2.0, 3.0].view()).is_err());
    }
}
