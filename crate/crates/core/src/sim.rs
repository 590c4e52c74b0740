//! Simulated scenarios: a rectangular workspace with corner anchors, test
//! trajectories, and noisy RSSI streams along them.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::doa::{AnchorLayout, RssiSnapshot};
use crate::radio::PathLossModel;
use crate::{Error, Point2, Rect, Result, Rng};

#[derive(Debug, Clone, PartialEq)]
pub struct Workspace {
    bounds: Rect,
    layout: AnchorLayout,
}

impl Workspace {
    /// `width × height` meters with an anchor on every corner.
    pub fn four_corner(width: f64, height: f64) -> Result<Self> {
        let bounds = Rect::from_size(width, height)?;
        Ok(Self { bounds, layout: AnchorLayout::four_corner_rect(bounds) })
    }

    pub fn with_layout(bounds: Rect, layout: AnchorLayout) -> Self {
        Self { bounds, layout }
    }

    pub fn bounds(&self) -> Rect {
        self.bounds
    }

    pub fn width(&self) -> f64 {
        self.bounds.width()
    }

    pub fn height(&self) -> f64 {
        self.bounds.height()
    }

    pub fn layout(&self) -> &AnchorLayout {
        &self.layout
    }
}

impl Default for Workspace {
    /// The 6 × 6 m four-corner workspace.
    fn default() -> Self {
        Self::four_corner(6.0, 6.0).expect("positive size")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryKind {
    Boundary,
    CrossCoverage,
    Diagonal,
    Custom,
}

impl TrajectoryKind {
    pub const SIMULATED: [TrajectoryKind; 3] =
        [TrajectoryKind::Diagonal, TrajectoryKind::CrossCoverage, TrajectoryKind::Boundary];

    pub fn name(self) -> &'static str {
        match self {
            TrajectoryKind::Boundary => "boundary",
            TrajectoryKind::CrossCoverage => "cross_coverage",
            TrajectoryKind::Diagonal => "diagonal",
            TrajectoryKind::Custom => "custom",
        }
    }
}

impl std::str::FromStr for TrajectoryKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "boundary" => Ok(TrajectoryKind::Boundary),
            "cross_coverage" | "cross" | "inside" => Ok(TrajectoryKind::CrossCoverage),
            "diagonal" => Ok(TrajectoryKind::Diagonal),
            "custom" => Ok(TrajectoryKind::Custom),
            other => Err(Error::InvalidConfig(format!("unknown trajectory `{other}`"))),
        }
    }
}

/// Shape parameters of the generated trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrajectoryParams {
    /// Inset from the workspace edges, meters.
    pub margin: f64,
    /// Spacing between serpentine lanes, meters.
    pub lane_pitch: f64,
}

impl Default for TrajectoryParams {
    fn default() -> Self {
        Self { margin: 0.5, lane_pitch: 1.0 }
    }
}

pub const DEFAULT_STEP_LENGTH: f64 = 0.25;

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub kind: TrajectoryKind,
    pub waypoints: Vec<Point2>,
    pub step_length: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    /// Custom path through `vertices`, discretized at `step_length`.
    pub fn custom(workspace: &Workspace, vertices: &[Point2], step_length: f64) -> Result<Self> {
        check_step(workspace, step_length)?;
        if vertices.is_empty() {
            return Err(Error::Empty("trajectory vertices"));
        }
        if let Some(p) = vertices.iter().find(|p| !workspace.bounds().contains(**p)) {
            return Err(Error::InvalidConfig(format!("vertex ({}, {}) lies outside the workspace", p.x, p.y)));
        }
        Ok(Self { kind: TrajectoryKind::Custom, waypoints: discretize(vertices, step_length, false), step_length })
    }
}

fn check_step(workspace: &Workspace, step_length: f64) -> Result<()> {
    if !(step_length.is_finite() && step_length > 0.0) {
        return Err(Error::InvalidConfig(format!("step length must be positive, got {step_length}")));
    }
    let side = workspace.width().min(workspace.height());
    if step_length > side {
        return Err(Error::StepTooLarge { step: step_length, side });
    }
    Ok(())
}

pub fn generate_trajectory(workspace: &Workspace, kind: TrajectoryKind, step_length: f64) -> Result<Trajectory> {
    generate_trajectory_with(workspace, kind, step_length, TrajectoryParams::default())
}

/// Boundary: closed loop around the inset rectangle. Diagonal: the
/// bottom-left to top-right diagonal, along the top edge, then the top-left
/// to bottom-right diagonal. Cross coverage: horizontal serpentine lanes.
pub fn generate_trajectory_with(
    workspace: &Workspace,
    kind: TrajectoryKind,
    step_length: f64,
    params: TrajectoryParams,
) -> Result<Trajectory> {
    check_step(workspace, step_length)?;
    let b = workspace.bounds();
    let m = params.margin;
    if !(m >= 0.0 && 2.0 * m < b.width() && 2.0 * m < b.height()) {
        return Err(Error::InvalidConfig(format!("margin {m} leaves no interior")));
    }
    let lo = Point2::new(b.min.x + m, b.min.y + m);
    let hi = Point2::new(b.max.x - m, b.max.y - m);
    let (vertices, closed) = match kind {
        TrajectoryKind::Boundary => (vec![lo, Point2::new(hi.x, lo.y), hi, Point2::new(lo.x, hi.y)], true),
        TrajectoryKind::Diagonal => (vec![lo, hi, Point2::new(lo.x, hi.y), Point2::new(hi.x, lo.y)], false),
        TrajectoryKind::CrossCoverage => {
            if params.lane_pitch.is_nan() || params.lane_pitch <= 0.0 {
                return Err(Error::InvalidConfig("lane pitch must be positive".into()));
            }
            let mut v = Vec::new();
            let mut y = lo.y;
            let mut rightward = true;
            while y <= hi.y + 1e-9 {
                let (a, c) = if rightward { (lo.x, hi.x) } else { (hi.x, lo.x) };
                v.push(Point2::new(a, y));
                v.push(Point2::new(c, y));
                rightward = !rightward;
                y += params.lane_pitch;
            }
            (v, false)
        }
        TrajectoryKind::Custom => {
            return Err(Error::InvalidConfig("custom trajectories are built with Trajectory::custom".into()));
        }
    };
    Ok(Trajectory { kind, waypoints: discretize(&vertices, step_length, closed), step_length })
}

/// Samples every segment at multiples of `step` from its start vertex, so
/// each vertex is a waypoint. Open paths also keep their final vertex.
fn discretize(vertices: &[Point2], step: f64, closed: bool) -> Vec<Point2> {
    let mut segs: Vec<(Point2, Point2)> = vertices.windows(2).map(|w| (w[0], w[1])).collect();
    if closed && vertices.len() > 1 {
        segs.push((*vertices.last().unwrap(), vertices[0]));
    }
    let mut out = Vec::new();
    for (a, b) in segs {
        let len = a.distance(b);
        // tolerate round-off so that e.g. 5 / 0.5 yields exactly 10 samples
        let count = (len / step - 1e-9).ceil().max(0.0) as usize;
        out.extend((0..count).map(|k| a + (b - a) * (k as f64 * step / len)));
    }
    if !closed || out.is_empty() {
        let last = *vertices.last().unwrap();
        if out.last().is_none_or(|p| p.distance(last) > 1e-9) {
            out.push(last);
        }
    }
    out
}

/// One noisy snapshot per waypoint, with the waypoint as ground truth.
pub fn simulate_stream(
    workspace: &Workspace,
    trajectory: &Trajectory,
    model: &PathLossModel,
    seed: u64,
) -> Result<Vec<RssiSnapshot>> {
    let mut rng = crate::rng_for(seed, 0x51);
    trajectory
        .waypoints
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let rssi = workspace
                .layout()
                .positions()
                .map(|a| model.sample_rssi(p.distance(a), &mut rng))
                .collect::<Result<Vec<_>>>()?;
            Ok(RssiSnapshot::new(i, rssi, Some(p)))
        })
        .collect()
}

/// Default odometry noise per step, meters (per axis).
pub const DEFAULT_ODOMETRY_NOISE_STD: f64 = 0.02;

/// Odometry displacements from the ground-truth path: the difference between
/// consecutive true positions plus per-axis Gaussian noise. The first entry
/// is a zero displacement. Snapshots without ground truth yield `None`.
pub fn odometry_from_truth(snapshots: &[RssiSnapshot], noise_std: f64, rng: &mut Rng) -> Result<Vec<Option<Point2>>> {
    if !(noise_std.is_finite() && noise_std >= 0.0) {
        return Err(Error::InvalidConfig(format!("odometry noise must be non-negative, got {noise_std}")));
    }
    let noise = (noise_std > 0.0).then(|| Normal::new(0.0, noise_std).expect("valid std"));
    let mut prev: Option<Point2> = None;
    Ok(snapshots
        .iter()
        .map(|s| {
            let here = s.true_position?;
            let mut delta = prev.map_or(Point2::ZERO, |p| here - p);
            prev = Some(here);
            if let Some(n) = &noise {
                delta.x += n.sample(rng);
                delta.y += n.sample(rng);
            }
            Some(delta)
        })
        .collect())
}
