//! Synthetic tissue maps.

use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};
use crate::scalar::Real;

/// T1 values (ms) assigned to phantom tissue classes, shortest first.
pub const T1_TABLE_MS: [f64; 7] = [200.0, 400.0, 600.0, 900.0, 1200.0, 1600.0, 2000.0];

/// T1 reported where there is no tissue (`pd = 0`).
pub const BACKGROUND_T1_MS: f64 = 1.0;

/// Proton density and T1 on a row-major grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TissueMaps<T: Real> {
    rows: usize,
    cols: usize,
    pd: Array1<T>,
    t1: Array1<T>,
}

impl<T: Real> TissueMaps<T> {
    /// Validates `pd ≥ 0`; background (`pd = 0`) T1 is reset to
    /// [`BACKGROUND_T1_MS`] and tissue T1 must be positive.
    pub fn new(rows: usize, cols: usize, pd: Array1<T>, mut t1: Array1<T>) -> Result<Self> {
        check_len("pd map", rows * cols, pd.len())?;
        check_len("t1 map", rows * cols, t1.len())?;
        if let Some(index) = pd.iter().position(|&p| !(p >= T::zero()) || !p.is_finite()) {
            return Err(Error::Domain {
                index,
                reason: "proton density must be finite and non-negative",
            });
        }
        for (k, (&p, t)) in pd.iter().zip(t1.iter_mut()).enumerate() {
            if p == T::zero() {
                *t = T::lit(BACKGROUND_T1_MS);
            } else if !(*t > T::zero()) || !t.is_finite() {
                return Err(Error::Domain {
                    index: k,
                    reason: "T1 must be positive wherever pd > 0",
                });
            }
        }
        Ok(TissueMaps { rows, cols, pd, t1 })
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

    pub fn pd(&self) -> &Array1<T> {
        &self.pd
    }

    pub fn t1(&self) -> &Array1<T> {
        &self.t1
    }

    /// Pixels containing tissue (`pd > 0`).
    pub fn foreground(&self) -> Vec<bool> {
        self.pd.iter().map(|&p| p > T::zero()).collect()
    }

    fn tissue_t1(&self) -> impl Iterator<Item = T> + '_ {
        self.pd
            .iter()
            .zip(self.t1.iter())
            .filter(|(&p, _)| p > T::zero())
            .map(|(_, &t)| t)
    }

    pub fn max_t1(&self) -> Option<T> {
        self.tissue_t1().reduce(T::max)
    }

    pub fn mean_t1(&self) -> Option<T> {
        let (sum, n) = self
            .tissue_t1()
            .fold((T::zero(), 0usize), |(s, n), t| (s + t, n + 1));
        (n > 0).then(|| sum / T::lit(n as f64))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhantomKind {
    /// Modified (high-contrast) Shepp-Logan head phantom.
    SheppLogan,
    /// Random overlapping rectangles on a zero background.
    Blocks { seed: u64 },
}

// (intensity, semi-axis a, semi-axis b, centre x, centre y, rotation in degrees)
const SHEPP_LOGAN: [(f64, f64, f64, f64, f64, f64); 10] = [
    (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    (-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0),
    (-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0),
    (-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0),
    (0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0),
    (0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0),
    (0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0),
    (0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0),
    (0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0),
    (0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0),
];

/// Intensity levels the modified Shepp-Logan phantom can take inside the head,
/// ascending, and the T1 each is assigned (ranks spread over [`T1_TABLE_MS`]).
pub const SHEPP_LOGAN_T1_LOOKUP: [(f64, f64); 5] = [
    (0.1, 200.0),
    (0.2, 600.0),
    (0.3, 900.0),
    (0.4, 1600.0),
    (1.0, 2000.0),
];

fn shepp_logan_t1(pd: f64) -> f64 {
    SHEPP_LOGAN_T1_LOOKUP
        .iter()
        .min_by(|a, b| (a.0 - pd).abs().total_cmp(&(b.0 - pd).abs()))
        .map(|&(_, t1)| t1)
        .unwrap_or(BACKGROUND_T1_MS)
}

fn shepp_logan<T: Real>(size: usize) -> Result<TissueMaps<T>> {
    let n = size as f64;
    let mut pd = Array1::<T>::zeros(size * size);
    let mut t1 = Array1::<T>::zeros(size * size);
    for i in 0..size {
        let y = 1.0 - (2 * i + 1) as f64 / n;
        for j in 0..size {
            let x = -1.0 + (2 * j + 1) as f64 / n;
            let mut v = 0.0;
            for &(amp, a, b, x0, y0, deg) in &SHEPP_LOGAN {
                let (s, c) = deg.to_radians().sin_cos();
                let (dx, dy) = (x - x0, y - y0);
                let u = dx * c + dy * s;
                let w = -dx * s + dy * c;
                if (u / a).powi(2) + (w / b).powi(2) <= 1.0 {
                    v += amp;
                }
            }
            // levels are multiples of 0.1; remove summation round-off
            let v = ((v * 10.0).round() / 10.0).max(0.0);
            let k = i * size + j;
            pd[k] = T::lit(v);
            t1[k] = T::lit(if v > 0.0 { shepp_logan_t1(v) } else { BACKGROUND_T1_MS });
        }
    }
    TissueMaps::new(size, size, pd, t1)
}

fn blocks<T: Real>(size: usize, seed: u64) -> Result<TissueMaps<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pd = Array1::<T>::zeros(size * size);
    let mut t1 = Array1::<T>::zeros(size * size);
    let margin = (size / 8).max(1);
    let inner = size - 2 * margin;
    let mut paint = |r0: usize, r1: usize, c0: usize, c1: usize, p: f64, t: f64| {
        for i in r0..r1 {
            for j in c0..c1 {
                pd[i * size + j] = T::lit(p);
                t1[i * size + j] = T::lit(t);
            }
        }
    };
    paint(margin, size - margin, margin, size - margin, 0.6, 900.0);
    let pd_levels = [0.3, 0.45, 0.8, 1.0];
    for _ in 0..3 {
        let h = rng.random_range(inner / 4..=inner / 2);
        let w = rng.random_range(inner / 4..=inner / 2);
        let r0 = margin + rng.random_range(0..=inner - h);
        let c0 = margin + rng.random_range(0..=inner - w);
        let p = pd_levels[rng.random_range(0..pd_levels.len())];
        let t = T1_TABLE_MS[rng.random_range(0..T1_TABLE_MS.len())];
        paint(r0, r0 + h, c0, c0 + w, p, t);
    }
    TissueMaps::new(size, size, pd, t1)
}

/// Builds a `size × size` phantom. Shepp-Logan PD is normalized to `[0, 1]`
/// with T1 from [`SHEPP_LOGAN_T1_LOOKUP`]; both kinds are deterministic.
pub fn make_phantom<T: Real>(kind: PhantomKind, size: usize) -> Result<TissueMaps<T>> {
    if size < 16 {
        return Err(Error::param("size", format!("{size} < 16")));
    }
    match kind {
        PhantomKind::SheppLogan => shepp_logan(size),
        PhantomKind::Blocks { seed } => blocks(size, seed),
    }
}
