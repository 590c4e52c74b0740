use serde::{Deserialize, Serialize};

use crate::doa::AnchorLayout;
use crate::geometry::wrap_angle;
use crate::pf::{particle_residual, MeasurementTuple, ResidualMode, RssResidual};
use crate::radio::PathLossModel;
use crate::{Error, Point2, Rect, Result};

use super::{argmin, GridSpec};

/// Likelihood and motion settings of the grid filter. The likelihood is the
/// same Gaussian over DOA (or RSS) residuals used by the particle filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MarkovConfig {
    pub resolution: f64,
    pub sigma: f64,
    pub residual_mode: ResidualMode,
    pub rss_residual: RssResidual,
    /// Std of the Gaussian blur applied to the belief before each update,
    /// meters.
    pub motion_std: f64,
}

impl Default for MarkovConfig {
    fn default() -> Self {
        Self {
            resolution: 0.1,
            sigma: 0.17,
            residual_mode: ResidualMode::Doa,
            rss_residual: RssResidual::SignedSum,
            motion_std: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovUpdate {
    pub estimate: Point2,
    pub posterior: Vec<f64>,
    /// The posterior vanished everywhere and was reset to uniform.
    pub degenerate: bool,
}

pub fn uniform_belief(grid: &GridSpec) -> Vec<f64> {
    vec![1.0 / grid.cell_count() as f64; grid.cell_count()]
}

/// One Bayes update over the grid: posterior ∝ prior × likelihood of each
/// cell centre's residual. Returns the maximum-posterior cell centre (first
/// in row-major order on ties).
pub fn markov_grid_locate(
    layout: &AnchorLayout,
    model: &PathLossModel,
    grid: &GridSpec,
    measurement: &MeasurementTuple,
    prior: &[f64],
    config: &MarkovConfig,
) -> Result<MarkovUpdate> {
    if prior.len() != grid.cell_count() {
        return Err(Error::InvalidConfig(format!(
            "prior has {} cells but the grid has {}",
            prior.len(),
            grid.cell_count()
        )));
    }
    if prior.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::InvalidConfig("prior probabilities must be finite and non-negative".into()));
    }
    measurement.snapshot.validate(layout)?;
    let residuals: Option<Vec<f64>> = grid
        .centers()
        .map(|c| particle_residual(c, measurement, layout, model, config.residual_mode, config.rss_residual))
        .collect();
    let Some(residuals) = residuals else {
        // no usable measurement: the belief is unchanged
        let mut posterior = prior.to_vec();
        let total: f64 = posterior.iter().sum();
        let degenerate = if (total - 1.0).abs() <= 1e-12 { false } else { normalize_or_reset(&mut posterior) };
        return Ok(MarkovUpdate { estimate: grid.center(argmax(&posterior)), posterior, degenerate });
    };
    let inv_two_var = 1.0 / (2.0 * config.sigma * config.sigma);
    let log_post: Vec<f64> = prior.iter().zip(&residuals).map(|(p, r)| p.ln() - r * r * inv_two_var).collect();
    let max = log_post.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut posterior: Vec<f64> =
        if max.is_finite() { log_post.iter().map(|l| (l - max).exp()).collect() } else { vec![0.0; prior.len()] };
    let degenerate = normalize_or_reset(&mut posterior);
    Ok(MarkovUpdate { estimate: grid.center(argmax(&posterior)), posterior, degenerate })
}

fn argmax(values: &[f64]) -> usize {
    argmin(values.iter().map(|v| -v)).expect("non-empty grid")
}

/// Normalizes to sum 1; an all-zero (or non-finite) vector becomes uniform
/// and `true` is returned.
fn normalize_or_reset(values: &mut [f64]) -> bool {
    let total: f64 = values.iter().sum();
    if total.is_finite() && total > 0.0 {
        let inv = 1.0 / total;
        values.iter_mut().for_each(|v| *v *= inv);
        false
    } else {
        let u = 1.0 / values.len() as f64;
        values.iter_mut().for_each(|v| *v = u);
        true
    }
}

/// Recursive grid filter over a measurement stream.
///
/// Per-cell predicted DOA and RSSI are computed once at construction. Each
/// step shifts the belief by the odometry displacement (when present), blurs
/// it with the motion kernel, and applies the measurement update.
#[derive(Debug, Clone)]
pub struct MarkovTracker {
    grid: GridSpec,
    config: MarkovConfig,
    layout: AnchorLayout,
    cell_doa: Vec<Option<f64>>,
    cell_rssi: Vec<f64>,
    belief: Vec<f64>,
    scratch: Vec<f64>,
    kernel: Vec<f64>,
    last_estimate: Option<Point2>,
    degeneracy_events: usize,
}

impl MarkovTracker {
    pub fn new(bounds: Rect, layout: AnchorLayout, model: PathLossModel, config: MarkovConfig) -> Result<Self> {
        if !(config.sigma.is_finite() && config.sigma > 0.0) {
            return Err(Error::InvalidConfig(format!("sigma must be positive, got {}", config.sigma)));
        }
        if !(config.motion_std.is_finite() && config.motion_std >= 0.0) {
            return Err(Error::InvalidConfig("motion_std must be non-negative".into()));
        }
        let grid = GridSpec::new(config.resolution, bounds)?;
        let cell_doa = grid.centers().map(|c| layout.predicted_doa(&model, c)).collect();
        let cell_rssi = grid.centers().flat_map(|c| layout.predicted_rssi(&model, c)).collect();
        let kernel = gaussian_kernel(config.motion_std / grid.resolution());
        let n = grid.cell_count();
        Ok(Self {
            grid,
            config,
            layout,
            cell_doa,
            cell_rssi,
            belief: uniform_belief(&grid),
            scratch: vec![0.0; n],
            kernel,
            last_estimate: None,
            degeneracy_events: 0,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn belief(&self) -> &[f64] {
        &self.belief
    }

    pub fn degeneracy_events(&self) -> usize {
        self.degeneracy_events
    }

    pub fn step(&mut self, measurement: &MeasurementTuple) -> Result<Point2> {
        measurement.snapshot.validate(&self.layout)?;
        if let Some(d) = measurement.odometry_delta {
            if d != Point2::ZERO {
                self.shift(d);
            }
        }
        self.blur();

        let inv_two_var = 1.0 / (2.0 * self.config.sigma * self.config.sigma);
        let updated = match self.config.residual_mode {
            ResidualMode::Doa => match measurement.smoothed_doa.angle() {
                Some(measured) => {
                    for (b, predicted) in self.belief.iter_mut().zip(&self.cell_doa) {
                        let r = match predicted {
                            Some(p) => wrap_angle(measured - p),
                            None => std::f64::consts::FRAC_PI_2,
                        };
                        *b *= (-r * r * inv_two_var).exp();
                    }
                    true
                }
                None => false,
            },
            ResidualMode::Rss => {
                let measured = &measurement.snapshot.rssi_by_anchor;
                let n = measured.len();
                let residuals = self.cell_rssi.chunks_exact(n).map(|pred| {
                    let diffs = pred.iter().zip(measured).map(|(p, s)| p - s);
                    match self.config.rss_residual {
                        RssResidual::SignedSum => diffs.sum::<f64>(),
                        RssResidual::AbsoluteSum => diffs.map(f64::abs).sum(),
                    }
                });
                // shift by the smallest squared residual so the best cell keeps weight 1
                self.scratch.clear();
                self.scratch.extend(residuals.map(|r| r * r));
                let floor = self.scratch.iter().copied().fold(f64::INFINITY, f64::min);
                for (b, r2) in self.belief.iter_mut().zip(&self.scratch) {
                    *b *= (-(r2 - floor) * inv_two_var).exp();
                }
                true
            }
        };
        if normalize_or_reset(&mut self.belief) {
            self.degeneracy_events += 1;
        }
        if !updated {
            if let Some(prev) = self.last_estimate {
                return Ok(prev);
            }
        }
        let estimate = self.grid.center(argmax(&self.belief));
        self.last_estimate = Some(estimate);
        Ok(estimate)
    }

    /// Moves the belief by `delta` using bilinear interpolation between cell
    /// centres. Cells whose source lies outside the grid receive no mass.
    fn shift(&mut self, delta: Point2) {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let res = self.grid.resolution();
        let fx = -delta.x / res;
        let fy = -delta.y / res;
        let at = |b: &[f64], i: i64, j: i64| {
            if i < 0 || j < 0 || i >= nx as i64 || j >= ny as i64 {
                0.0
            } else {
                b[j as usize * nx + i as usize]
            }
        };
        self.scratch.resize(self.belief.len(), 0.0);
        for j in 0..ny {
            let sy = j as f64 + fy;
            let j0 = sy.floor();
            let ty = sy - j0;
            let j0 = j0 as i64;
            for i in 0..nx {
                let sx = i as f64 + fx;
                let i0 = sx.floor();
                let tx = sx - i0;
                let i0 = i0 as i64;
                let b = &self.belief;
                let top = at(b, i0, j0) * (1.0 - tx) + at(b, i0 + 1, j0) * tx;
                let bottom = at(b, i0, j0 + 1) * (1.0 - tx) + at(b, i0 + 1, j0 + 1) * tx;
                self.scratch[j * nx + i] = top * (1.0 - ty) + bottom * ty;
            }
        }
        std::mem::swap(&mut self.belief, &mut self.scratch);
    }

    /// Separable Gaussian blur; the kernel is renormalized where it overhangs
    /// the grid so edge cells are not attenuated.
    fn blur(&mut self) {
        let r = self.kernel.len() / 2;
        if r == 0 {
            return;
        }
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        self.scratch.resize(self.belief.len(), 0.0);
        for pass in 0..2 {
            let (len, count, stride, step) = if pass == 0 { (nx, ny, nx, 1) } else { (ny, nx, 1, nx) };
            for line in 0..count {
                let base = line * stride;
                for k in 0..len {
                    let lo = k.saturating_sub(r);
                    let hi = (k + r).min(len - 1);
                    let (mut acc, mut wsum) = (0.0, 0.0);
                    for m in lo..=hi {
                        let w = self.kernel[m + r - k];
                        acc += w * self.belief[base + m * step];
                        wsum += w;
                    }
                    self.scratch[base + k * step] = acc / wsum;
                }
            }
            std::mem::swap(&mut self.belief, &mut self.scratch);
        }
    }
}

fn gaussian_kernel(std_cells: f64) -> Vec<f64> {
    if std_cells < 1e-3 {
        return vec![1.0];
    }
    let r = (3.0 * std_cells).ceil() as i64;
    (-r..=r).map(|k| (-(k * k) as f64 / (2.0 * std_cells * std_cells)).exp()).collect()
}
