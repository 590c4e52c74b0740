//! Comparison estimators: trilateration, weighted centroid, differential RSS
//! and Markov grid localization.

mod centroid;
mod drss;
mod markov;
mod trilateration;

pub use centroid::weighted_centroid;
pub use drss::{drss_locate, drss_offline, DrssLocator, DrssTemplate};
pub use markov::{markov_grid_locate, uniform_belief, MarkovConfig, MarkovTracker, MarkovUpdate};
pub use trilateration::{trilaterate, trilateration_objective, TrilaterationResult};

use serde::{Deserialize, Serialize};

use crate::{Error, Point2, Rect, Result};

/// Regular grid of square cells covering a rectangle, indexed row-major
/// (x fastest). Cells on the far edges may overhang the bounds when the
/// resolution does not divide the side; their centres are clamped inside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    resolution: f64,
    bounds: Rect,
    nx: usize,
    ny: usize,
}

impl GridSpec {
    pub fn new(resolution: f64, bounds: Rect) -> Result<Self> {
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(Error::InvalidConfig(format!("grid resolution must be positive, got {resolution}")));
        }
        let cells = |side: f64| ((side / resolution) - 1e-9).ceil().max(1.0) as usize;
        Ok(Self { resolution, bounds, nx: cells(bounds.width()), ny: cells(bounds.height()) })
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn bounds(&self) -> Rect {
        self.bounds
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn cell_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn center(&self, index: usize) -> Point2 {
        let (i, j) = (index % self.nx, index / self.nx);
        let x = (self.bounds.min.x + (i as f64 + 0.5) * self.resolution).min(self.bounds.max.x);
        let y = (self.bounds.min.y + (j as f64 + 0.5) * self.resolution).min(self.bounds.max.y);
        Point2::new(x, y)
    }

    pub fn centers(&self) -> impl Iterator<Item = Point2> + '_ {
        (0..self.cell_count()).map(|k| self.center(k))
    }

    /// Index of the cell containing `p` (clamped into the grid).
    pub fn cell_of(&self, p: Point2) -> usize {
        let i = ((p.x - self.bounds.min.x) / self.resolution).floor().clamp(0.0, (self.nx - 1) as f64) as usize;
        let j = ((p.y - self.bounds.min.y) / self.resolution).floor().clamp(0.0, (self.ny - 1) as f64) as usize;
        j * self.nx + i
    }
}

/// Index of the first minimum (row-major tie-breaking).
pub(crate) fn argmin(values: impl Iterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.enumerate() {
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}
