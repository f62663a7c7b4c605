//! Sparse recovery from linear and non-linear measurements.
//!
//! The crate provides
//!
//! * [`transforms`]: analysis operators `Ψ` (identity, 2-D finite differences,
//!   orthonormal Haar) with exact adjoints;
//! * [`measurements`]: forward maps `f` (linear, exponential, logarithmic and
//!   the Fourier-MRI saturation-recovery model) with their data-term gradients,
//!   K-space masks and measurement noise;
//! * [`solvers`]: iterative shrinkage for synthesis (`λ‖x‖₁`) and analysis
//!   (`λ‖Ψx‖₁`) priors, for linear and non-linear `f`;
//! * [`mri`]: the two-scan proton density / T1 mapping pipeline.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! `*F64` aliases below fix the common double-precision case.

pub mod error;
pub mod linalg;
pub mod measurements;
pub mod mri;
pub mod scalar;
pub mod solvers;
pub mod transforms;

pub use error::{Error, Result};
pub use linalg::LinearOperator;
pub use measurements::{MeasurementModel, MeasurementVector, ModelKind, SamplingMask};
pub use scalar::Real;
pub use solvers::{SolverConfig, SolverTrace};
pub use transforms::{AnalysisOperator, SignalShape, TransformKind};

pub type MeasurementModelF64 = MeasurementModel<f64>;
pub type MeasurementVectorF64 = MeasurementVector<f64>;
pub type SolverConfigF64 = SolverConfig<f64>;
pub type SolverTraceF64 = SolverTrace<f64>;
pub type TissueMapsF64 = mri::TissueMaps<f64>;
pub type ScanProtocolF64 = mri::ScanProtocol<f64>;

pub type MeasurementModelF32 = MeasurementModel<f32>;
pub type SolverConfigF32 = SolverConfig<f32>;

/// Crate version, recorded in experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
