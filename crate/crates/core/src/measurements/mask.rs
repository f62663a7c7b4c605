//! K-space sampling masks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Boolean selection `R` of K-space locations on a row-major grid whose zero
/// frequency is at `(0, 0)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplingMask {
    rows: usize,
    cols: usize,
    selected: Vec<bool>,
}

/// Euclidean distance of grid index `(i, j)` from the zero frequency, using
/// signed frequency indices (`k` or `k - n` for the upper half).
pub fn frequency_radius(i: usize, j: usize, rows: usize, cols: usize) -> f64 {
    let signed = |k: usize, n: usize| {
        if k <= n / 2 {
            k as f64
        } else {
            k as f64 - n as f64
        }
    };
    let (fy, fx) = (signed(i, rows), signed(j, cols));
    (fy * fy + fx * fx).sqrt()
}

impl SamplingMask {
    pub fn full(rows: usize, cols: usize) -> Self {
        SamplingMask {
            rows,
            cols,
            selected: vec![true; rows * cols],
        }
    }

    pub fn from_selected(rows: usize, cols: usize, selected: Vec<bool>) -> Result<Self> {
        if selected.len() != rows * cols {
            return Err(Error::dim("mask", rows * cols, selected.len()));
        }
        Ok(SamplingMask {
            rows,
            cols,
            selected,
        })
    }

    /// Variable-density random mask with exactly `round(fraction·N)` locations.
    ///
    /// Location `k` is drawn with weight `(1 - d_k/d_max)^density_power`, `d_k`
    /// its distance from the zero frequency, by weighted sampling without
    /// replacement (exponential-key method). The zero frequency is always kept.
    /// Locations of zero weight are only used once every positively weighted
    /// location has been taken.
    pub fn generate(
        rows: usize,
        cols: usize,
        fraction: f64,
        density_power: f64,
        seed: u64,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::param("shape", "grid dimensions must be positive"));
        }
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::param("fraction", format!("{fraction} not in (0, 1]")));
        }
        if !(density_power >= 0.0 && density_power.is_finite()) {
            return Err(Error::param(
                "density_power",
                format!("{density_power} must be finite and non-negative"),
            ));
        }
        let total = rows * cols;
        let target = ((fraction * total as f64).round() as usize).clamp(1, total);
        let mut selected = vec![false; total];
        selected[0] = true;

        let d_max = (0..total)
            .map(|k| frequency_radius(k / cols, k % cols, rows, cols))
            .fold(0.0, f64::max);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // (key, tiebreak, index); larger keys win
        let mut keyed: Vec<(f64, f64, usize)> = (1..total)
            .map(|k| {
                let d = frequency_radius(k / cols, k % cols, rows, cols);
                let w = if d_max > 0.0 {
                    (1.0 - d / d_max).max(0.0).powf(density_power)
                } else {
                    1.0
                };
                let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
                let tiebreak: f64 = rng.random();
                let key = if w > 0.0 { u.ln() / w } else { f64::NEG_INFINITY };
                (key, tiebreak, k)
            })
            .collect();
        keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.total_cmp(&a.1)));
        for &(_, _, k) in keyed.iter().take(target - 1) {
            selected[k] = true;
        }
        Ok(SamplingMask {
            rows,
            cols,
            selected,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn selected(&self) -> &[bool] {
        &self.selected
    }

    pub fn is_selected(&self, row: usize, col: usize) -> bool {
        self.selected[row * self.cols + col]
    }

    pub fn count(&self) -> usize {
        self.selected.iter().filter(|&&s| s).count()
    }

    /// Achieved sampling fraction.
    pub fn fraction(&self) -> f64 {
        self.count() as f64 / self.len() as f64
    }

    /// Row-major indices of the selected locations.
    pub fn indices(&self) -> Vec<usize> {
        self.selected
            .iter()
            .enumerate()
            .filter_map(|(k, &s)| s.then_some(k))
            .collect()
    }
}
