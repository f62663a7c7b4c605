use super::phantom::TissueMaps;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Two-scan acquisition: a PD-weighted scan with a long repetition time and a
/// T1-weighted scan with `TR` near the mean T1, sharing one full K-space budget.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanProtocol<T: Real> {
    pub tr_pd: T,
    pub tr_t1: T,
    pub pd_fraction: f64,
    pub t1_fraction: f64,
    pub noise_sigma: T,
    pub density_power: f64,
    pub pd_mask_seed: u64,
    pub t1_mask_seed: u64,
    pub pd_noise_seed: u64,
    pub t1_noise_seed: u64,
}

/// Variable-density exponent used unless configured.
pub const DEFAULT_DENSITY_POWER: f64 = 3.0;

/// Minimum `tr_pd / max(T1)` for the PD scan to count as T1-nulled.
pub const PD_NULLING_RATIO: f64 = 5.0;

impl<T: Real> ScanProtocol<T> {
    /// Protocol with `tr_pd = 5·max T1` and `tr_t1 = mean T1` over tissue.
    /// Seeds for both masks and both noise draws derive from `seed`.
    pub fn for_maps(
        maps: &TissueMaps<T>,
        pd_fraction: f64,
        t1_fraction: f64,
        seed: u64,
    ) -> Result<Self> {
        let max_t1 = maps
            .max_t1()
            .ok_or_else(|| Error::Degenerate("tissue maps contain no tissue".into()))?;
        let mean_t1 = maps.mean_t1().expect("tissue present");
        let protocol = ScanProtocol {
            tr_pd: T::lit(PD_NULLING_RATIO) * max_t1,
            tr_t1: mean_t1,
            pd_fraction,
            t1_fraction,
            noise_sigma: T::zero(),
            density_power: DEFAULT_DENSITY_POWER,
            pd_mask_seed: seed,
            t1_mask_seed: seed.wrapping_add(1),
            pd_noise_seed: seed.wrapping_add(2),
            t1_noise_seed: seed.wrapping_add(3),
        };
        protocol.validate()?;
        Ok(protocol)
    }

    /// Checks positivity and the acquisition budget `pd_fraction + t1_fraction ≤ 1`.
    pub fn validate(&self) -> Result<()> {
        for (name, f) in [("pd_fraction", self.pd_fraction), ("t1_fraction", self.t1_fraction)] {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::param(name, format!("{f} not in (0, 1]")));
            }
        }
        if self.pd_fraction + self.t1_fraction > 1.0 + 1e-12 {
            return Err(Error::param(
                "fractions",
                format!(
                    "pd {} + t1 {} exceeds one full K-space acquisition",
                    self.pd_fraction, self.t1_fraction
                ),
            ));
        }
        if !(self.tr_pd > T::zero() && self.tr_t1 > T::zero()) {
            return Err(Error::param("tr", "repetition times must be positive"));
        }
        if !(self.noise_sigma >= T::zero()) {
            return Err(Error::param("noise_sigma", "must be non-negative"));
        }
        Ok(())
    }

    /// Additionally checks the PD-scan nulling condition `tr_pd ≥ 5·max T1`.
    pub fn validate_for(&self, maps: &TissueMaps<T>) -> Result<()> {
        self.validate()?;
        if let Some(max_t1) = maps.max_t1() {
            if self.tr_pd < T::lit(PD_NULLING_RATIO) * max_t1 {
                return Err(Error::param(
                    "tr_pd",
                    format!("{} < {PD_NULLING_RATIO} × max T1 ({max_t1})", self.tr_pd),
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mri::{make_phantom, PhantomKind};

    #[test]
    fn budget_is_enforced() {
        let maps: TissueMaps<f64> = make_phantom(PhantomKind::SheppLogan, 32).unwrap();
        assert!(ScanProtocol::for_maps(&maps, 0.3, 0.7, 1).is_ok());
        assert!(ScanProtocol::for_maps(&maps, 0.5, 0.6, 1).is_err());
        assert!(ScanProtocol::for_maps(&maps, 0.0, 0.6, 1).is_err());
    }

    #[test]
    fn defaults_follow_tissue_statistics() {
        let maps: TissueMaps<f64> = make_phantom(PhantomKind::SheppLogan, 64).unwrap();
        let p = ScanProtocol::for_maps(&maps, 0.3, 0.7, 1).unwrap();
        assert_eq!(p.tr_pd, 5.0 * 2000.0);
        assert_eq!(p.tr_t1, maps.mean_t1().unwrap());
        let mut short = p.clone();
        short.tr_pd = 4000.0;
        assert!(short.validate_for(&maps).is_err());
        assert!(p.validate_for(&maps).is_ok());
    }
}
