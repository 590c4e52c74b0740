//! Particle filter weighted by a Gaussian likelihood over DOA (or RSS) error.
//!
//! Each iteration propagates the particles through the motion model, scores
//! every particle against the newest measurement, multiplies the Gaussian
//! kernels of the last `likelihood_window` residuals along the particle's
//! ancestry, normalizes, takes the best particle as the position estimate and
//! resamples.

use std::collections::VecDeque;

use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::doa::{AnchorLayout, DoaEstimate, RssiSnapshot};
use crate::geometry::wrap_angle;
use crate::radio::PathLossModel;
use crate::{Error, Point2, Rect, Result, Rng};

/// Residual assigned to a hypothesis whose own predicted DOA is undefined
/// (it sits where the predicted gradient vanishes).
const UNDEFINED_DOA_RESIDUAL: f64 = std::f64::consts::FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualMode {
    /// Wrapped difference between measured and predicted DOA, radians.
    #[default]
    Doa,
    /// Summed difference between predicted and measured RSSI, dBm.
    Rss,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RssResidual {
    /// `Σ_j (predicted_j - measured_j)`; differences may cancel.
    #[default]
    SignedSum,
    /// `Σ_j |predicted_j - measured_j|`.
    AbsoluteSum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resampling {
    Multinomial,
    #[default]
    Systematic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointEstimate {
    /// Position of the highest-weight particle, lowest index on ties.
    #[default]
    MaxWeight,
    WeightedMean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PfConfig {
    pub num_particles: usize,
    /// Likelihood spread: radians in DOA mode, dBm in RSS mode.
    pub sigma: f64,
    /// Number of most recent residuals multiplied into each weight.
    pub likelihood_window: usize,
    pub residual_mode: ResidualMode,
    pub rss_residual: RssResidual,
    /// Per-axis std of the random-walk motion noise, meters.
    pub jitter_std: f64,
    pub resampling: Resampling,
    pub estimate: PointEstimate,
    /// Resample only when ESS falls below this fraction of the particle
    /// count. `None` resamples every iteration.
    pub ess_threshold: Option<f64>,
    pub seed: u64,
}

impl Default for PfConfig {
    fn default() -> Self {
        Self {
            num_particles: 200,
            sigma: 0.17,
            likelihood_window: 5,
            residual_mode: ResidualMode::Doa,
            rss_residual: RssResidual::SignedSum,
            jitter_std: 0.1,
            resampling: Resampling::Systematic,
            estimate: PointEstimate::MaxWeight,
            ess_threshold: None,
            seed: 0,
        }
    }
}

impl PfConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_particles < 2 {
            return Err(Error::InvalidConfig("num_particles must be at least 2".into()));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::InvalidConfig(format!("sigma must be positive, got {}", self.sigma)));
        }
        if self.likelihood_window == 0 {
            return Err(Error::InvalidConfig("likelihood_window must be at least 1".into()));
        }
        if !(self.jitter_std.is_finite() && self.jitter_std >= 0.0) {
            return Err(Error::InvalidConfig(format!("jitter_std must be non-negative, got {}", self.jitter_std)));
        }
        if let Some(t) = self.ess_threshold {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::InvalidConfig(format!("ess_threshold must lie in [0, 1], got {t}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub position: Point2,
    pub weight: f64,
}

/// The newest residuals along one particle's ancestry, oldest evicted first.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualHistory {
    values: VecDeque<f64>,
    capacity: usize,
}

impl ResidualHistory {
    pub fn new(capacity: usize) -> Self {
        Self { values: VecDeque::with_capacity(capacity), capacity }
    }

    pub fn push(&mut self, residual: f64) {
        if self.values.len() == self.capacity {
            self.values.pop_front();
        }
        self.values.push_back(residual);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Oldest first.
    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().copied()
    }
}

/// One filter input: the raw snapshot, its smoothed DOA and, when the
/// scenario has a motion model, the odometry displacement since the previous
/// measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementTuple {
    pub snapshot: RssiSnapshot,
    pub smoothed_doa: DoaEstimate,
    pub odometry_delta: Option<Point2>,
}

/// Outcome of a weight update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeightUpdate {
    /// Every weight underflowed; weights were reset to uniform.
    pub degenerate: bool,
}

/// Weighted position hypotheses confined to a rectangular workspace.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet {
    particles: Vec<Particle>,
    histories: Vec<ResidualHistory>,
    bounds: Rect,
}

impl ParticleSet {
    /// Uniform positions over `bounds`, uniform weights.
    pub fn init_particles(bounds: Rect, config: &PfConfig, rng: &mut Rng) -> Result<Self> {
        config.validate()?;
        if !(bounds.width() > 0.0 && bounds.height() > 0.0) {
            return Err(Error::DegenerateWorkspace);
        }
        let n = config.num_particles;
        let w = 1.0 / n as f64;
        let particles = (0..n)
            .map(|_| {
                let x = rng.random_range(bounds.min.x..=bounds.max.x);
                let y = rng.random_range(bounds.min.y..=bounds.max.y);
                Particle { position: Point2::new(x, y), weight: w }
            })
            .collect();
        Ok(Self { particles, histories: vec![ResidualHistory::new(config.likelihood_window); n], bounds })
    }

    /// Builds a set from explicit particles, each with an empty history.
    pub fn from_particles(particles: Vec<Particle>, bounds: Rect, likelihood_window: usize) -> Result<Self> {
        if particles.is_empty() {
            return Err(Error::Empty("particle set"));
        }
        let histories = vec![ResidualHistory::new(likelihood_window.max(1)); particles.len()];
        Ok(Self { particles, histories, bounds })
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn histories(&self) -> &[ResidualHistory] {
        &self.histories
    }

    pub fn histories_mut(&mut self) -> &mut [ResidualHistory] {
        &mut self.histories
    }

    pub fn bounds(&self) -> Rect {
        self.bounds
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.particles.iter().map(|p| p.weight).sum()
    }

    pub fn effective_sample_size(&self) -> f64 {
        let sq: f64 = self.particles.iter().map(|p| p.weight * p.weight).sum();
        if sq > 0.0 {
            self.weight_sum().powi(2) / sq
        } else {
            0.0
        }
    }

    /// Shifts every particle by the odometry displacement (if any), adds
    /// per-axis Gaussian jitter and clamps to the workspace.
    pub fn propagate(&mut self, odometry_delta: Option<Point2>, jitter_std: f64, rng: &mut Rng) {
        let shift = odometry_delta.unwrap_or(Point2::ZERO);
        let jitter = (jitter_std > 0.0).then(|| Normal::new(0.0, jitter_std).expect("finite jitter std"));
        for p in &mut self.particles {
            let mut next = p.position + shift;
            if let Some(noise) = &jitter {
                next.x += noise.sample(rng);
                next.y += noise.sample(rng);
            }
            p.position = self.bounds.clamp(next);
        }
    }

    /// Sets each weight to the product of Gaussian kernels over the particle's
    /// stored residuals, then normalizes to sum 1.
    ///
    /// Accumulates in log space; if every weight still underflows the set is
    /// reset to uniform weights and the update reports degeneracy.
    pub fn weight_update(&mut self, sigma: f64) -> WeightUpdate {
        let log_norm = -(sigma * (2.0 * std::f64::consts::PI).sqrt()).ln();
        let inv_two_var = 1.0 / (2.0 * sigma * sigma);
        let log_w: Vec<f64> =
            self.histories.iter().map(|h| h.iter().map(|e| log_norm - e * e * inv_two_var).sum::<f64>()).collect();
        self.set_log_weights(&log_w)
    }

    /// Normalizes `exp(log_w)` into the particle weights.
    pub fn set_log_weights(&mut self, log_w: &[f64]) -> WeightUpdate {
        debug_assert_eq!(log_w.len(), self.particles.len());
        let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        if max.is_finite() {
            for (p, lw) in self.particles.iter_mut().zip(log_w) {
                p.weight = (lw - max).exp();
                total += p.weight;
            }
        }
        if !(total.is_finite() && total > 0.0) {
            let w = 1.0 / self.particles.len() as f64;
            self.particles.iter_mut().for_each(|p| p.weight = w);
            return WeightUpdate { degenerate: true };
        }
        let inv = 1.0 / total;
        self.particles.iter_mut().for_each(|p| p.weight *= inv);
        WeightUpdate { degenerate: false }
    }

    /// Draws a new generation proportional to weight; offspring inherit their
    /// parent's residual history and weights reset to uniform.
    pub fn resample(&mut self, scheme: Resampling, rng: &mut Rng) {
        let n = self.particles.len();
        let total = self.weight_sum();
        let mut cumulative = Vec::with_capacity(n);
        let mut acc = 0.0;
        for p in &self.particles {
            acc += p.weight / total;
            cumulative.push(acc);
        }
        // guard against round-off leaving the last bin short of 1
        *cumulative.last_mut().expect("non-empty set") = f64::INFINITY;

        let indices: Vec<usize> = match scheme {
            Resampling::Systematic => {
                let step = 1.0 / n as f64;
                let start = rng.random_range(0.0..step);
                let mut idx = 0;
                (0..n)
                    .map(|k| {
                        let u = start + k as f64 * step;
                        while cumulative[idx] < u {
                            idx += 1;
                        }
                        idx
                    })
                    .collect()
            }
            Resampling::Multinomial => (0..n)
                .map(|_| {
                    let u: f64 = rng.random();
                    cumulative.partition_point(|&c| c < u).min(n - 1)
                })
                .collect(),
        };

        let w = 1.0 / n as f64;
        let particles = indices.iter().map(|&i| Particle { position: self.particles[i].position, weight: w }).collect();
        let histories = indices.iter().map(|&i| self.histories[i].clone()).collect();
        self.particles = particles;
        self.histories = histories;
    }

    pub fn estimate(&self, kind: PointEstimate) -> Point2 {
        match kind {
            PointEstimate::MaxWeight => {
                let mut best = 0;
                for (i, p) in self.particles.iter().enumerate().skip(1) {
                    if p.weight > self.particles[best].weight {
                        best = i;
                    }
                }
                self.particles[best].position
            }
            PointEstimate::WeightedMean => {
                let total = self.weight_sum();
                self.particles.iter().fold(Point2::ZERO, |acc, p| acc + p.position * p.weight) * (1.0 / total)
            }
        }
    }
}

/// Residual of a position hypothesis against a measurement. `None` when the
/// measurement carries no usable DOA in DOA mode.
pub fn particle_residual(
    position: Point2,
    measurement: &MeasurementTuple,
    layout: &AnchorLayout,
    model: &PathLossModel,
    mode: ResidualMode,
    rss_variant: RssResidual,
) -> Option<f64> {
    match mode {
        ResidualMode::Doa => {
            let measured = measurement.smoothed_doa.angle()?;
            Some(match layout.predicted_doa(model, position) {
                Some(predicted) => wrap_angle(measured - predicted),
                None => UNDEFINED_DOA_RESIDUAL,
            })
        }
        ResidualMode::Rss => {
            let diffs = layout
                .positions()
                .zip(&measurement.snapshot.rssi_by_anchor)
                .map(|(a, s)| model.rssi_between(position, a) - s);
            Some(match rss_variant {
                RssResidual::SignedSum => diffs.sum(),
                RssResidual::AbsoluteSum => diffs.map(f64::abs).sum(),
            })
        }
    }
}

/// Complete filter state for one track.
#[derive(Debug, Clone)]
pub struct ParticleFilter {
    config: PfConfig,
    layout: AnchorLayout,
    model: PathLossModel,
    set: ParticleSet,
    rng: Rng,
    last_estimate: Option<Point2>,
    degeneracy_events: usize,
}

impl ParticleFilter {
    pub fn new(bounds: Rect, layout: AnchorLayout, model: PathLossModel, config: PfConfig) -> Result<Self> {
        let mut rng = crate::rng_for(config.seed, 0x9f);
        let set = ParticleSet::init_particles(bounds, &config, &mut rng)?;
        Ok(Self { config, layout, model, set, rng, last_estimate: None, degeneracy_events: 0 })
    }

    pub fn config(&self) -> &PfConfig {
        &self.config
    }

    pub fn particles(&self) -> &ParticleSet {
        &self.set
    }

    pub fn layout(&self) -> &AnchorLayout {
        &self.layout
    }

    pub fn last_estimate(&self) -> Option<Point2> {
        self.last_estimate
    }

    pub fn degeneracy_events(&self) -> usize {
        self.degeneracy_events
    }

    /// One online iteration: propagate, score, reweight, estimate, resample.
    ///
    /// When the measurement has no usable DOA (DOA mode) the particles are
    /// only propagated and the previous estimate is returned.
    pub fn step(&mut self, measurement: &MeasurementTuple) -> Result<Point2> {
        measurement.snapshot.validate(&self.layout)?;
        self.set.propagate(measurement.odometry_delta, self.config.jitter_std, &mut self.rng);

        let usable = match self.config.residual_mode {
            ResidualMode::Doa => measurement.smoothed_doa.valid,
            ResidualMode::Rss => true,
        };
        if !usable {
            let prior = self.last_estimate.unwrap_or_else(|| self.set.estimate(PointEstimate::WeightedMean));
            return Ok(prior);
        }

        for (p, h) in self.set.particles.iter().zip(self.set.histories.iter_mut()) {
            let r = particle_residual(
                p.position,
                measurement,
                &self.layout,
                &self.model,
                self.config.residual_mode,
                self.config.rss_residual,
            )
            .expect("usable measurement yields a residual");
            h.push(r);
        }
        if self.set.weight_update(self.config.sigma).degenerate {
            self.degeneracy_events += 1;
        }
        // the estimate is read from the weighted set; resampling resets weights
        let estimate = self.set.estimate(self.config.estimate);
        let resample = match self.config.ess_threshold {
            None => true,
            Some(t) => self.set.effective_sample_size() < t * self.set.len() as f64,
        };
        if resample {
            self.set.resample(self.config.resampling, &mut self.rng);
        }
        self.last_estimate = Some(estimate);
        Ok(estimate)
    }
}
