//! Scalar abstraction shared by every numerical routine in the crate.

use ndarray::NdFloat;
use num_traits::FromPrimitive;
use rustfft::FftNum;

/// Real floating point type the solvers are generic over (`f32` or `f64`).
pub trait Real: NdFloat + FromPrimitive + FftNum + Default {
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }
}

impl Real for f32 {}
impl Real for f64 {}
