//! Measurement families `f(·)`, K-space sampling and measurement noise.

mod fourier;
mod mask;
mod model;
mod noise;

pub use fourier::{stack_complex, unstack_complex, Fft2, FourierSampler};
pub use mask::{frequency_radius, SamplingMask};
pub use model::{Evaluation, Family, FourierMri, MeasurementModel, MeasurementVector, ModelKind};
pub use noise::add_noise;
