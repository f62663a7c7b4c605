use std::fmt;

use ndarray::{Array1, Array2, ArrayView1, Zip};
use num_complex::Complex;

use super::fourier::{stack_complex, FourierSampler};
use super::mask::SamplingMask;
use super::noise::add_noise;
use crate::error::{check_len, Error, Result};
use crate::linalg::{mat_t_vec, power_iteration, LinearOperator};
use crate::scalar::Real;

/// Measurements `y`: real for the matrix families, complex K-space samples for
/// the Fourier-MRI family.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasurementVector<T: Real> {
    Real(Array1<T>),
    Complex(Array1<Complex<T>>),
}

impl<T: Real> MeasurementVector<T> {
    pub fn len(&self) -> usize {
        match self {
            MeasurementVector::Real(v) => v.len(),
            MeasurementVector::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn norm_sqr(&self) -> T {
        match self {
            MeasurementVector::Real(v) => v.dot(v),
            MeasurementVector::Complex(v) => v.iter().fold(T::zero(), |a, c| a + c.norm_sqr()),
        }
    }

    /// Real view; complex samples are interleaved as `[re, im, …]`.
    pub fn to_stacked(&self) -> Array1<T> {
        match self {
            MeasurementVector::Real(v) => v.clone(),
            MeasurementVector::Complex(v) => stack_complex(v.view()),
        }
    }

    pub fn as_real(&self) -> Option<&Array1<T>> {
        match self {
            MeasurementVector::Real(v) => Some(v),
            MeasurementVector::Complex(_) => None,
        }
    }

    pub fn as_complex(&self) -> Option<&Array1<Complex<T>>> {
        match self {
            MeasurementVector::Complex(v) => Some(v),
            MeasurementVector::Real(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Linear,
    Exponential,
    Logarithmic,
    FourierMri,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Linear => "linear",
            ModelKind::Exponential => "exponential",
            ModelKind::Logarithmic => "logarithmic",
            ModelKind::FourierMri => "fourier-mri",
        })
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" => Ok(ModelKind::Linear),
            "exponential" | "exp" => Ok(ModelKind::Exponential),
            "logarithmic" | "log" => Ok(ModelKind::Logarithmic),
            "fourier-mri" | "fourier" => Ok(ModelKind::FourierMri),
            other => Err(Error::param("kind", format!("unknown measurement kind `{other}`"))),
        }
    }
}

/// `f(Z) = R F (ρ ⊙ (1 − e^{−Z}))`. Pixels outside `support` are not
/// unknowns: their gradient and Jacobian columns are zero.
#[derive(Debug, Clone)]
pub struct FourierMri<T: Real> {
    sampler: FourierSampler<T>,
    rho: Array1<T>,
    support: Option<Vec<bool>>,
}

impl<T: Real> FourierMri<T> {
    pub fn sampler(&self) -> &FourierSampler<T> {
        &self.sampler
    }

    pub fn rho(&self) -> &Array1<T> {
        &self.rho
    }

    pub fn support(&self) -> Option<&[bool]> {
        self.support.as_deref()
    }

    fn check_z(&self, z: ArrayView1<T>) -> Result<()> {
        check_len("fourier-mri input", self.rho.len(), z.len())?;
        match z.iter().position(|&v| !(v > T::zero())) {
            Some(index) => Err(Error::Domain {
                index,
                reason: "Z must be strictly positive",
            }),
            None => Ok(()),
        }
    }

    fn signal(&self, z: ArrayView1<T>) -> Array1<T> {
        Zip::from(&self.rho)
            .and(&z)
            .map_collect(|&r, &zi| r * (T::one() - (-zi).exp()))
    }

    /// `∂signal/∂Z` restricted to the support.
    fn sensitivity(&self, z: ArrayView1<T>) -> Array1<T> {
        let mut s = Zip::from(&self.rho)
            .and(&z)
            .map_collect(|&r, &zi| r * (-zi).exp());
        if let Some(support) = &self.support {
            for (v, &keep) in s.iter_mut().zip(support) {
                if !keep {
                    *v = T::zero();
                }
            }
        }
        s
    }
}

/// Result of [`MeasurementModel::evaluate`].
#[derive(Debug, Clone)]
pub struct Evaluation<T: Real> {
    pub misfit: T,
    pub residual: MeasurementVector<T>,
    /// `e^{Ax}` (exponential) or `Ax` (logarithmic).
    image: Option<Array1<T>>,
}

#[derive(Debug, Clone)]
pub enum Family<T: Real> {
    Linear(Array2<T>),
    Exponential(Array2<T>),
    Logarithmic(Array2<T>),
    FourierMri(FourierMri<T>),
}

/// A forward map `f` together with the noise level of its acquisitions.
///
/// * linear: `f(x) = Ax`
/// * exponential: `f(x) = exp(Ax)` elementwise
/// * logarithmic: `f(x) = ln(Ax)`, defined where `Ax > 0`
/// * fourier-mri: `f(Z) = RF(ρ ⊙ (1 − e^{−Z}))`, defined where `Z > 0`
///
/// Out-of-domain inputs are reported as [`Error::Domain`], never clamped.
#[derive(Debug, Clone)]
pub struct MeasurementModel<T: Real> {
    family: Family<T>,
    noise_sigma: T,
}

impl<T: Real> MeasurementModel<T> {
    pub fn linear(a: Array2<T>) -> Self {
        Self::from_family(Family::Linear(a))
    }

    pub fn exponential(a: Array2<T>) -> Self {
        Self::from_family(Family::Exponential(a))
    }

    pub fn logarithmic(a: Array2<T>) -> Self {
        Self::from_family(Family::Logarithmic(a))
    }

    /// Matrix family selected by `kind`; `FourierMri` is rejected.
    pub fn with_matrix(kind: ModelKind, a: Array2<T>) -> Result<Self> {
        match kind {
            ModelKind::Linear => Ok(Self::linear(a)),
            ModelKind::Exponential => Ok(Self::exponential(a)),
            ModelKind::Logarithmic => Ok(Self::logarithmic(a)),
            ModelKind::FourierMri => Err(Error::param(
                "kind",
                "fourier-mri models are built from a mask and a PD map",
            )),
        }
    }

    pub fn fourier_mri(mask: SamplingMask, rho: Array1<T>) -> Result<Self> {
        check_len("fourier-mri rho", mask.len(), rho.len())?;
        if let Some(index) = rho.iter().position(|&r| !(r >= T::zero())) {
            return Err(Error::Domain {
                index,
                reason: "proton density must be non-negative",
            });
        }
        Ok(Self::from_family(Family::FourierMri(FourierMri {
            sampler: FourierSampler::new(mask)?,
            rho,
            support: None,
        })))
    }

    /// Restricts the Fourier-MRI unknowns to `support`.
    pub fn with_support(mut self, support: Vec<bool>) -> Result<Self> {
        match &mut self.family {
            Family::FourierMri(m) => {
                check_len("fourier-mri support", m.rho.len(), support.len())?;
                m.support = Some(support);
                Ok(self)
            }
            _ => Err(Error::param("support", "only fourier-mri models take a support")),
        }
    }

    pub fn with_noise(mut self, noise_sigma: T) -> Result<Self> {
        if !(noise_sigma >= T::zero()) {
            return Err(Error::param("noise_sigma", "must be non-negative"));
        }
        self.noise_sigma = noise_sigma;
        Ok(self)
    }

    fn from_family(family: Family<T>) -> Self {
        MeasurementModel {
            family,
            noise_sigma: T::zero(),
        }
    }

    pub fn family(&self) -> &Family<T> {
        &self.family
    }

    pub fn noise_sigma(&self) -> T {
        self.noise_sigma
    }

    pub fn kind(&self) -> ModelKind {
        match self.family {
            Family::Linear(_) => ModelKind::Linear,
            Family::Exponential(_) => ModelKind::Exponential,
            Family::Logarithmic(_) => ModelKind::Logarithmic,
            Family::FourierMri(_) => ModelKind::FourierMri,
        }
    }

    pub fn input_len(&self) -> usize {
        match &self.family {
            Family::Linear(a) | Family::Exponential(a) | Family::Logarithmic(a) => a.ncols(),
            Family::FourierMri(m) => m.rho.len(),
        }
    }

    pub fn output_len(&self) -> usize {
        match &self.family {
            Family::Linear(a) | Family::Exponential(a) | Family::Logarithmic(a) => a.nrows(),
            Family::FourierMri(m) => m.sampler.sample_count(),
        }
    }

    /// Noiseless forward value `f(x)`.
    pub fn forward(&self, x: ArrayView1<T>) -> Result<MeasurementVector<T>> {
        check_len("forward", self.input_len(), x.len())?;
        Ok(match &self.family {
            Family::Linear(a) => MeasurementVector::Real(a.dot(&x)),
            Family::Exponential(a) => MeasurementVector::Real(a.dot(&x).mapv(T::exp)),
            Family::Logarithmic(a) => {
                let ax = positive_image(a, x)?;
                MeasurementVector::Real(ax.mapv(T::ln))
            }
            Family::FourierMri(m) => {
                m.check_z(x)?;
                MeasurementVector::Complex(m.sampler.sample(m.signal(x).view())?)
            }
        })
    }

    /// `f(x)` plus Gaussian noise at the model's `noise_sigma`.
    pub fn measure(&self, x: ArrayView1<T>, seed: u64) -> Result<MeasurementVector<T>> {
        add_noise(&self.forward(x)?, self.noise_sigma, seed)
    }

    fn check_measurement(&self, y: &MeasurementVector<T>) -> Result<()> {
        let matches = matches!(
            (&self.family, y),
            (Family::FourierMri(_), MeasurementVector::Complex(_))
                | (Family::Linear(_), MeasurementVector::Real(_))
                | (Family::Exponential(_), MeasurementVector::Real(_))
                | (Family::Logarithmic(_), MeasurementVector::Real(_))
        );
        if !matches {
            return Err(Error::param(
                "y",
                format!("measurement representation does not match the {} model", self.kind()),
            ));
        }
        check_len("measurements", self.output_len(), y.len())
    }

    /// `y − f(x)`.
    pub fn residual(
        &self,
        x: ArrayView1<T>,
        y: &MeasurementVector<T>,
    ) -> Result<MeasurementVector<T>> {
        self.check_measurement(y)?;
        Ok(match (self.forward(x)?, y) {
            (MeasurementVector::Real(fx), MeasurementVector::Real(y)) => {
                MeasurementVector::Real(y - &fx)
            }
            (MeasurementVector::Complex(fx), MeasurementVector::Complex(y)) => {
                MeasurementVector::Complex(y - &fx)
            }
            _ => unreachable!("representation checked above"),
        })
    }

    /// Data term `‖y − f(x)‖²`.
    pub fn data_misfit(&self, x: ArrayView1<T>, y: &MeasurementVector<T>) -> Result<T> {
        Ok(self.residual(x, y)?.norm_sqr())
    }

    /// `∇ₓ‖y − f(x)‖²` (no ½ factor).
    ///
    /// For the Fourier-MRI family the real gradient of the complex residual is
    /// `−2 (ρ ⊙ e^{−Z}) ⊙ Re{Fᴴ Rᵀ (y − f(Z))}`.
    pub fn residual_gradient(&self, x: ArrayView1<T>, y: &MeasurementVector<T>) -> Result<Array1<T>> {
        let r = self.residual(x, y)?;
        let g = self.jacobian_adjoint(x, &r)?;
        Ok(g.mapv(|v| -T::two() * v))
    }

    /// Forward evaluation at `x` that keeps what [`Self::gradient_at`] needs,
    /// so a misfit followed by a gradient at the same point costs one forward map.
    pub fn evaluate(&self, x: ArrayView1<T>, y: &MeasurementVector<T>) -> Result<Evaluation<T>> {
        self.check_measurement(y)?;
        check_len("evaluate", self.input_len(), x.len())?;
        let (fx, image) = match &self.family {
            Family::Linear(a) => (MeasurementVector::Real(a.dot(&x)), None),
            Family::Exponential(a) => {
                let ex = a.dot(&x).mapv(T::exp);
                (MeasurementVector::Real(ex.clone()), Some(ex))
            }
            Family::Logarithmic(a) => {
                let ax = positive_image(a, x)?;
                (MeasurementVector::Real(ax.mapv(T::ln)), Some(ax))
            }
            Family::FourierMri(_) => (self.forward(x)?, None),
        };
        let residual = match (fx, y) {
            (MeasurementVector::Real(fx), MeasurementVector::Real(y)) => {
                MeasurementVector::Real(y - &fx)
            }
            (MeasurementVector::Complex(fx), MeasurementVector::Complex(y)) => {
                MeasurementVector::Complex(y - &fx)
            }
            _ => unreachable!("representation checked above"),
        };
        Ok(Evaluation {
            misfit: residual.norm_sqr(),
            residual,
            image,
        })
    }

    /// [`Self::residual_gradient`] at the point `eval` was computed for.
    pub fn gradient_at(&self, x: ArrayView1<T>, eval: &Evaluation<T>) -> Result<Array1<T>> {
        let g = match (&self.family, &eval.residual, &eval.image) {
            (Family::Linear(a), MeasurementVector::Real(r), _) => mat_t_vec(a, r.view()),
            (Family::Exponential(a), MeasurementVector::Real(r), Some(ex)) => {
                mat_t_vec(a, (ex * r).view())
            }
            (Family::Logarithmic(a), MeasurementVector::Real(r), Some(ax)) => {
                mat_t_vec(a, (r / ax).view())
            }
            _ => self.jacobian_adjoint(x, &eval.residual)?,
        };
        Ok(g.mapv(|v| -T::two() * v))
    }

    /// Jacobian-vector product `J(x) v`, in the stacked real representation.
    pub fn jacobian_apply(&self, x: ArrayView1<T>, v: ArrayView1<T>) -> Result<Array1<T>> {
        check_len("jacobian input", self.input_len(), v.len())?;
        match &self.family {
            Family::Linear(a) => {
                check_len("jacobian point", a.ncols(), x.len())?;
                Ok(a.dot(&v))
            }
            Family::Exponential(a) => {
                check_len("jacobian point", a.ncols(), x.len())?;
                Ok(a.dot(&x).mapv(T::exp) * a.dot(&v))
            }
            Family::Logarithmic(a) => {
                let ax = positive_image(a, x)?;
                Ok(a.dot(&v) / ax)
            }
            Family::FourierMri(m) => {
                m.check_z(x)?;
                let weighted = m.sensitivity(x) * v;
                m.sampler.apply(weighted.view())
            }
        }
    }

    /// `J(x)ᵀ r` with the residual in its native representation.
    pub fn jacobian_adjoint(&self, x: ArrayView1<T>, r: &MeasurementVector<T>) -> Result<Array1<T>> {
        self.check_measurement(r)?;
        match (&self.family, r) {
            (Family::Linear(a), MeasurementVector::Real(r)) => {
                check_len("jacobian point", a.ncols(), x.len())?;
                Ok(mat_t_vec(a, r.view()))
            }
            (Family::Exponential(a), MeasurementVector::Real(r)) => {
                check_len("jacobian point", a.ncols(), x.len())?;
                let e = a.dot(&x).mapv(T::exp);
                Ok(mat_t_vec(a, (e * r).view()))
            }
            (Family::Logarithmic(a), MeasurementVector::Real(r)) => {
                let ax = positive_image(a, x)?;
                Ok(mat_t_vec(a, (r / &ax).view()))
            }
            (Family::FourierMri(m), MeasurementVector::Complex(r)) => {
                m.check_z(x)?;
                Ok(m.sensitivity(x) * m.sampler.adjoint(r.view())?)
            }
            _ => unreachable!("representation checked above"),
        }
    }

    /// Largest eigenvalue of the local Gram matrix `J(x)ᵀJ(x)`.
    pub fn local_gram_norm(&self, x: ArrayView1<T>, iters: usize, seed: u64) -> Result<T> {
        power_iteration(self.input_len(), iters, seed, |v| {
            let jv = self.jacobian_apply(x, v)?;
            let jv = match &self.family {
                Family::FourierMri(_) => MeasurementVector::Complex(
                    super::fourier::unstack_complex(jv.view())?,
                ),
                _ => MeasurementVector::Real(jv),
            };
            self.jacobian_adjoint(x, &jv)
        })
    }

    /// Checks `x` is inside the domain of `f`.
    pub fn check_domain(&self, x: ArrayView1<T>) -> Result<()> {
        check_len("domain", self.input_len(), x.len())?;
        match &self.family {
            Family::Logarithmic(a) => positive_image(a, x).map(|_| ()),
            Family::FourierMri(m) => m.check_z(x),
            _ => Ok(()),
        }
    }
}

fn positive_image<T: Real>(a: &Array2<T>, x: ArrayView1<T>) -> Result<Array1<T>> {
    check_len("logarithmic input", a.ncols(), x.len())?;
    let ax = a.dot(&x);
    match ax.iter().position(|&v| !(v > T::zero())) {
        Some(index) => Err(Error::Domain {
            index,
            reason: "logarithm of a non-positive value (Ax <= 0)",
        }),
        None => Ok(ax),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::gaussian_vector;
    use ndarray::{array, Array2};

    fn random_matrix(m: usize, n: usize, seed: u64) -> Array2<f64> {
        let scale = 1.0 / (m as f64).sqrt();
        Array2::from_shape_vec((m, n), gaussian_vector::<f64>(m * n, seed).to_vec())
            .unwrap()
            .mapv(|v| v * scale)
    }

    /// Central finite differences of the data misfit.
    fn fd_gradient(model: &MeasurementModel<f64>, x: &Array1<f64>, y: &MeasurementVector<f64>, coords: &[usize], h: f64) -> Vec<f64> {
        coords
            .iter()
            .map(|&i| {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                (model.data_misfit(xp.view(), y).unwrap() - model.data_misfit(xm.view(), y).unwrap())
                    / (2.0 * h)
            })
            .collect()
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-12)
    }

    #[test]
    fn trivial_forward_values() {
        let eye = Array2::<f64>::eye(3);
        let lin = MeasurementModel::linear(eye.clone());
        assert_eq!(
            lin.forward(array![1.0, 2.0, 3.0].view()).unwrap(),
            MeasurementVector::Real(array![1.0, 2.0, 3.0])
        );
        let exp = MeasurementModel::exponential(eye);
        assert_eq!(
            exp.forward(Array1::zeros(3).view()).unwrap(),
            MeasurementVector::Real(Array1::ones(3))
        );
    }

    #[test]
    fn fourier_of_saturated_constant_is_dc_only() {
        let mask = SamplingMask::full(6, 6);
        let model = MeasurementModel::<f64>::fourier_mri(mask, Array1::ones(36)).unwrap();
        let y = model.forward(Array1::from_elem(36, 50.0).view()).unwrap();
        let y = y.as_complex().unwrap();
        // direct DFT of the constant field: only DC = N/√N = 6
        assert!((y[0].re - 6.0).abs() < 1e-12 && y[0].im.abs() < 1e-12);
        assert!(y.iter().skip(1).all(|c| c.norm() < 1e-12));
    }

    #[test]
    fn domain_errors_identify_index() {
        let a = array![[1.0, 0.0], [0.0, 1.0]];
        let log = MeasurementModel::logarithmic(a);
        match log.forward(array![1.0, -1.0].view()) {
            Err(Error::Domain { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected domain error, got {other:?}"),
        }
        let mri = MeasurementModel::fourier_mri(SamplingMask::full(2, 2), Array1::ones(4)).unwrap();
        match mri.forward(array![1.0, 1.0, 0.0, 1.0].view()) {
            Err(Error::Domain { index, .. }) => assert_eq!(index, 2),
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn linear_gradient_zero_at_consistent_point_and_matches_formula() {
        let a = random_matrix(5, 8, 1);
        let model = MeasurementModel::linear(a.clone());
        let x: Array1<f64> = gaussian_vector(8, 2);
        let y = model.forward(x.view()).unwrap();
        let g = model.residual_gradient(x.view(), &y).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-14));

        let y2: Array1<f64> = gaussian_vector(5, 3);
        let g = model
            .residual_gradient(x.view(), &MeasurementVector::Real(y2.clone()))
            .unwrap();
        let explicit = a.t().dot(&(&y2 - &a.dot(&x))) * -2.0;
        for (p, q) in g.iter().zip(explicit.iter()) {
            assert!((p - q).abs() <= 1e-12 * q.abs().max(1.0));
        }
    }

    #[test]
    fn exponential_gradient_matches_finite_differences() {
        let a = random_matrix(5, 8, 10);
        let model = MeasurementModel::exponential(a);
        let x: Array1<f64> = gaussian_vector(8, 11);
        let y = MeasurementVector::Real(gaussian_vector::<f64>(5, 12).mapv(f64::exp));
        let g = model.residual_gradient(x.view(), &y).unwrap();
        let coords: Vec<usize> = (0..8).collect();
        let fd = fd_gradient(&model, &x, &y, &coords, 1e-6);
        for (&i, f) in coords.iter().zip(fd) {
            assert!(rel_err(g[i], f) <= 1e-5, "coord {i}: {} vs {f}", g[i]);
        }
    }

    #[test]
    fn fourier_gradient_matches_finite_differences() {
        let mask = SamplingMask::generate(8, 8, 0.5, 3.0, 5).unwrap();
        let rho = gaussian_vector::<f64>(64, 6).mapv(|v| 0.5 + 0.3 * v.abs());
        let model = MeasurementModel::fourier_mri(mask, rho).unwrap();
        let z = gaussian_vector::<f64>(64, 7).mapv(|v| 1.0 + 0.3 * v.abs());
        let ztrue = gaussian_vector::<f64>(64, 8).mapv(|v| 0.8 + 0.5 * v.abs());
        let y = model.forward(ztrue.view()).unwrap();
        let g = model.residual_gradient(z.view(), &y).unwrap();
        let coords = [0, 5, 9, 17, 23, 31, 40, 47, 55, 63];
        let fd = fd_gradient(&model, &z, &y, &coords, 1e-6);
        for (&i, f) in coords.iter().zip(fd) {
            assert!(rel_err(g[i], f) <= 1e-4, "coord {i}: {} vs {f}", g[i]);
        }
    }

    #[test]
    fn support_zeroes_gradient_outside() {
        let mask = SamplingMask::full(4, 4);
        let mut support = vec![true; 16];
        support[3] = false;
        let model = MeasurementModel::fourier_mri(mask, Array1::ones(16))
            .unwrap()
            .with_support(support)
            .unwrap();
        let y = model.forward(Array1::from_elem(16, 2.0).view()).unwrap();
        let g = model.residual_gradient(Array1::ones(16).view(), &y).unwrap();
        assert_eq!(g[3], 0.0);
        assert!(g[2] != 0.0);
    }

    #[test]
    fn measurement_representation_is_checked() {
        let model = MeasurementModel::linear(Array2::<f64>::eye(2));
        let y = MeasurementVector::Complex(Array1::from_elem(2, Complex::new(0.0, 0.0)));
        assert!(model.residual_gradient(array![1.0, 1.0].view(), &y).is_err());
        let short = MeasurementVector::Real(array![1.0]);
        assert!(matches!(
            model.residual_gradient(array![1.0, 1.0].view(), &short),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn local_gram_norm_of_linear_model_is_matrix_norm() {
        let a = random_matrix(10, 20, 4);
        let model = MeasurementModel::linear(a.clone());
        let local: f64 = model.local_gram_norm(Array1::zeros(20).view(), 200, 1).unwrap();
        let global: f64 = crate::linalg::gram_norm(&a, 200, 1).unwrap();
        assert_eq!(local, global);
    }
}
