//! Localization of a mobile radio from received signal strength measured at
//! fixed anchors.
//!
//! The central estimator is a particle filter whose weights come from a
//! Gaussian likelihood over the direction of arrival (DOA) implied by the
//! spatial RSSI gradient across the anchors ([`pf`], [`doa`]). Four baseline
//! estimators ([`baselines`]), a log-distance radio simulator ([`radio`],
//! [`sim`]), CSV dataset ingestion ([`datasets`]) and an experiment harness
//! ([`bench`]) complete the toolkit.

pub mod baselines;
pub mod bench;
pub mod datasets;
pub mod doa;
mod error;
pub mod geometry;
pub mod pf;
pub mod radio;
pub mod sim;

pub use error::{Error, Result};
pub use geometry::{Point2, Rect};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic random source used throughout the crate.
pub type Rng = ChaCha8Rng;

/// Builds an independent random stream for `(seed, stream)`.
///
/// Different `stream` values give statistically independent sequences for the
/// same seed, which keeps measurement noise, odometry noise and filter
/// randomness decoupled within one trial.
pub fn rng_for(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
