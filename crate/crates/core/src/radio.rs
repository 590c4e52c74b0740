//! Log-distance path-loss model: `rssi = A - 10·n·log10(d)`.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::{Error, Point2, Result};

/// Distances below this floor are clamped before taking the logarithm.
pub const MIN_DISTANCE_M: f64 = 0.01;

/// Reference power used when a scenario provides no calibration.
pub const DEFAULT_REFERENCE_POWER_DBM: f64 = -40.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel")]
pub struct PathLossModel {
    reference_power_dbm: f64,
    path_loss_exponent: f64,
    noise_std_dbm: f64,
}

#[derive(Deserialize)]
struct RawModel {
    reference_power_dbm: f64,
    path_loss_exponent: f64,
    #[serde(default)]
    noise_std_dbm: f64,
}

impl TryFrom<RawModel> for PathLossModel {
    type Error = Error;
    fn try_from(raw: RawModel) -> Result<Self> {
        PathLossModel::new(raw.reference_power_dbm, raw.path_loss_exponent, raw.noise_std_dbm)
    }
}

impl PathLossModel {
    /// `reference_power_dbm` is the RSSI at 1 m. The exponent must be positive
    /// and the noise standard deviation non-negative.
    pub fn new(reference_power_dbm: f64, path_loss_exponent: f64, noise_std_dbm: f64) -> Result<Self> {
        if !reference_power_dbm.is_finite() {
            return Err(Error::InvalidModel("reference power must be finite".into()));
        }
        if !(path_loss_exponent.is_finite() && path_loss_exponent > 0.0) {
            return Err(Error::InvalidModel(format!("path-loss exponent must be positive, got {path_loss_exponent}")));
        }
        if !(noise_std_dbm.is_finite() && noise_std_dbm >= 0.0) {
            return Err(Error::InvalidModel(format!("noise std must be non-negative, got {noise_std_dbm}")));
        }
        Ok(Self { reference_power_dbm, path_loss_exponent, noise_std_dbm })
    }

    pub fn reference_power_dbm(&self) -> f64 {
        self.reference_power_dbm
    }

    pub fn path_loss_exponent(&self) -> f64 {
        self.path_loss_exponent
    }

    pub fn noise_std_dbm(&self) -> f64 {
        self.noise_std_dbm
    }

    pub fn with_noise_std(self, noise_std_dbm: f64) -> Result<Self> {
        Self::new(self.reference_power_dbm, self.path_loss_exponent, noise_std_dbm)
    }

    pub fn with_exponent(self, path_loss_exponent: f64) -> Result<Self> {
        Self::new(self.reference_power_dbm, path_loss_exponent, self.noise_std_dbm)
    }

    /// Noiseless RSSI at `distance` meters.
    pub fn predict_rssi(&self, distance: f64) -> Result<f64> {
        if !distance.is_finite() {
            return Err(Error::NonFinite("distance"));
        }
        Ok(self.rssi_unchecked(distance))
    }

    /// Noiseless RSSI between two finite points.
    pub fn rssi_between(&self, a: Point2, b: Point2) -> f64 {
        self.rssi_unchecked(a.distance(b))
    }

    #[inline]
    fn rssi_unchecked(&self, distance: f64) -> f64 {
        let d = distance.max(MIN_DISTANCE_M);
        self.reference_power_dbm - 10.0 * self.path_loss_exponent * d.log10()
    }

    /// Noisy RSSI: the prediction plus zero-mean Gaussian noise. With zero
    /// noise the result is bit-identical to [`predict_rssi`](Self::predict_rssi)
    /// and no randomness is consumed.
    pub fn sample_rssi<R: rand::Rng + ?Sized>(&self, distance: f64, rng: &mut R) -> Result<f64> {
        let mean = self.predict_rssi(distance)?;
        if self.noise_std_dbm == 0.0 {
            return Ok(mean);
        }
        Ok(mean + self.noise(rng))
    }

    fn noise<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // std is validated non-negative and finite at construction
        let normal = Normal::new(0.0, self.noise_std_dbm).expect("valid noise std");
        normal.sample(rng)
    }

    /// Distance at which the model predicts `rssi`. Never fails; every real
    /// RSSI maps to a positive distance.
    pub fn invert_rssi_to_distance(&self, rssi: f64) -> f64 {
        10f64.powf((self.reference_power_dbm - rssi) / (10.0 * self.path_loss_exponent))
    }
}

impl Default for PathLossModel {
    /// `A = -40 dBm`, `n = 3`, noiseless.
    fn default() -> Self {
        Self { reference_power_dbm: DEFAULT_REFERENCE_POWER_DBM, path_loss_exponent: 3.0, noise_std_dbm: 0.0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn model(a: f64, n: f64) -> PathLossModel {
        PathLossModel::new(a, n, 0.0).unwrap()
    }

    #[test]
    fn predict_examples() {
        assert_eq!(model(-40.0, 2.0).predict_rssi(1.0).unwrap(), -40.0);
        assert_eq!(model(-40.0, 2.0).predict_rssi(10.0).unwrap(), -60.0);
        // -40 - 30·log10(2.5), evaluated independently in double precision
        assert_relative_eq!(model(-40.0, 3.0).predict_rssi(2.5).unwrap(), -51.938200260161125, epsilon = 1e-12);
    }

    #[test]
    fn predict_clamps_and_rejects() {
        let m = model(-40.0, 2.0);
        assert_eq!(m.predict_rssi(0.0).unwrap(), m.predict_rssi(MIN_DISTANCE_M).unwrap());
        assert_eq!(m.predict_rssi(0.001).unwrap(), -40.0 + 40.0);
        assert!(matches!(m.predict_rssi(f64::NAN), Err(Error::NonFinite(_))));
        assert!(m.predict_rssi(f64::INFINITY).is_err());
    }

    #[test]
    fn constructor_validation() {
        assert!(PathLossModel::new(-40.0, 0.0, 1.0).is_err());
        assert!(PathLossModel::new(-40.0, -2.0, 1.0).is_err());
        assert!(PathLossModel::new(-40.0, 2.0, -0.1).is_err());
        assert!(PathLossModel::new(f64::NAN, 2.0, 0.0).is_err());
        assert!(PathLossModel::new(-40.0, 6.0, 4.0).is_ok());
    }

    #[test]
    fn inverse_examples() {
        let m = model(-40.0, 2.0);
        assert_relative_eq!(m.invert_rssi_to_distance(-60.0), 10.0, max_relative = 1e-15);
        assert_eq!(m.invert_rssi_to_distance(-40.0), 1.0);
        for d in [0.5, 3.0, 17.0] {
            assert_relative_eq!(m.invert_rssi_to_distance(m.predict_rssi(d).unwrap()), d, max_relative = 1e-12);
        }
    }

    #[test]
    fn zero_noise_sampling_is_exact() {
        let m = model(-40.0, 2.0);
        let mut rng = crate::rng_for(1, 0);
        assert_eq!(m.sample_rssi(10.0, &mut rng).unwrap(), -60.0);
    }

    #[test]
    fn sample_moments() {
        let m = PathLossModel::new(-40.0, 3.0, 2.0).unwrap();
        let mut rng = crate::rng_for(7, 0);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| m.sample_rssi(4.0, &mut rng).unwrap()).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let expected = m.predict_rssi(4.0).unwrap();
        assert!((mean - expected).abs() <= 3.0 * 2.0 / (n as f64).sqrt());
        assert!((var.sqrt() - 2.0).abs() <= 0.05);
    }

    proptest! {
        #[test]
        fn round_trip(d in 1e-2f64..1e4, a in -90.0f64..-10.0, n in 1.5f64..6.0) {
            let m = model(a, n);
            let back = m.invert_rssi_to_distance(m.predict_rssi(d).unwrap());
            prop_assert!((back - d).abs() <= 1e-9 * d);
        }

        #[test]
        fn strictly_decreasing(d in 1e-2f64..1e3, step in 1e-3f64..10.0, n in 1.5f64..6.0) {
            let m = model(-40.0, n);
            prop_assert!(m.predict_rssi(d + step).unwrap() < m.predict_rssi(d).unwrap());
        }

        #[test]
        fn zero_noise_bit_identical(d in 1e-3f64..1e3, seed in any::<u64>()) {
            let m = model(-45.0, 2.7);
            let mut rng = crate::rng_for(seed, 0);
            prop_assert_eq!(m.sample_rssi(d, &mut rng).unwrap().to_bits(), m.predict_rssi(d).unwrap().to_bits());
        }
    }
}
