//! Browser bindings for the interactive demo in `www/`.
//!
//! Three operations: stepping a simulated walk through the particle filter
//! and the baselines ([`Demo`]), drawing the noiseless DOA field
//! ([`doa_field`]), and localizing a single clicked position with the
//! snapshot baselines ([`locate_once`]).

use doaloc::bench::{build_estimator, Estimator, EstimatorContext, EstimatorKind, EstimatorSettings, Scenario};
use doaloc::doa::{DoaSmoother, RssiSnapshot};
use doaloc::pf::{MeasurementTuple, ParticleFilter};
use doaloc::radio::PathLossModel;
use doaloc::sim::{TrajectoryKind, Workspace, DEFAULT_STEP_LENGTH};
use doaloc::{rng_for, Point2};
use wasm_bindgen::prelude::*;

/// Estimators drawn next to the particle filter, in output order.
const BASELINES: [EstimatorKind; 4] =
    [EstimatorKind::Markov, EstimatorKind::Drss, EstimatorKind::Trilateration, EstimatorKind::Wcl];

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn model(noise_std: f64) -> Result<PathLossModel, String> {
    PathLossModel::new(-40.0, 3.0, noise_std).map_err(err)
}

/// A simulated walk replayed one snapshot per [`Demo::step`].
#[wasm_bindgen]
pub struct Demo {
    workspace: Workspace,
    snapshots: Vec<RssiSnapshot>,
    odometry: Vec<Option<Point2>>,
    smoother: DoaSmoother,
    filter: ParticleFilter,
    baselines: Vec<Box<dyn Estimator + Send>>,
    use_odometry: bool,
    cursor: usize,
    sq_err: Vec<f64>,
}

#[wasm_bindgen]
impl Demo {
    /// `trajectory` is `diagonal`, `cross_coverage` or `boundary`.
    #[wasm_bindgen(constructor)]
    pub fn new(
        trajectory: &str,
        noise_std: f64,
        particles: usize,
        sigma: f64,
        use_odometry: bool,
        seed: u64,
    ) -> Result<Demo, String> {
        let kind: TrajectoryKind = trajectory.parse().map_err(err)?;
        let truth = model(noise_std)?;
        let scenario = Scenario::simulated(Workspace::default(), kind, DEFAULT_STEP_LENGTH, truth).map_err(err)?;
        let realization = scenario.realize(seed).map_err(err)?;
        let mut settings = EstimatorSettings::calibrated();
        settings.pf.num_particles = particles;
        settings.pf.sigma = sigma;
        settings.pf.seed = seed;
        settings.markov.sigma = sigma;
        settings.markov.resolution = 0.2;
        settings.odometry = use_odometry;
        let workspace = Workspace::default();
        let ctx = EstimatorContext { bounds: workspace.bounds(), layout: workspace.layout(), model: &scenario.model };
        let baselines = BASELINES
            .iter()
            .map(|&k| build_estimator(k, ctx, &settings, seed))
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?;
        let filter = ParticleFilter::new(workspace.bounds(), workspace.layout().clone(), scenario.model, settings.pf)
            .map_err(err)?;
        Ok(Demo {
            smoother: DoaSmoother::new(settings.smoothing),
            workspace,
            snapshots: realization.snapshots,
            odometry: realization.odometry,
            filter,
            baselines,
            use_odometry,
            cursor: 0,
            sq_err: vec![0.0; 1 + BASELINES.len()],
        })
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn width(&self) -> f64 {
        self.workspace.width()
    }

    pub fn height(&self) -> f64 {
        self.workspace.height()
    }

    /// Advances one snapshot. Returns `[truth_x, truth_y, doa, pf_x, pf_y,
    /// markov_x, markov_y, drss_x, drss_y, tri_x, tri_y, wcl_x, wcl_y]`, or
    /// an empty array once the walk is over. `doa` is NaN when undefined.
    pub fn step(&mut self) -> Result<Vec<f64>, String> {
        let Some(snap) = self.snapshots.get(self.cursor) else { return Ok(Vec::new()) };
        let odo = self.odometry[self.cursor].filter(|_| self.use_odometry);
        let truth = snap.true_position.ok_or("simulated snapshot without ground truth")?;
        let doa = self.smoother.push(self.workspace.layout(), snap).map_err(err)?;
        let pf = self
            .filter
            .step(&MeasurementTuple { snapshot: snap.clone(), smoothed_doa: doa, odometry_delta: odo })
            .map_err(err)?;
        let mut out = vec![truth.x, truth.y, if doa.valid { doa.smoothed_angle_rad } else { f64::NAN }, pf.x, pf.y];
        self.sq_err[0] += pf.distance(truth).powi(2);
        for (i, est) in self.baselines.iter_mut().enumerate() {
            let p = est.step(snap, self.odometry[self.cursor]).map_err(err)?;
            self.sq_err[i + 1] += p.distance(truth).powi(2);
            out.extend([p.x, p.y]);
        }
        self.cursor += 1;
        Ok(out)
    }

    /// Flattened `[x, y, weight]` per particle.
    pub fn particles(&self) -> Vec<f64> {
        self.filter.particles().particles().iter().flat_map(|p| [p.position.x, p.position.y, p.weight]).collect()
    }

    /// Running RMSE so far for PF-DOA, Markov, D-RSS, trilateration, WCL.
    pub fn rmse(&self) -> Vec<f64> {
        let n = self.cursor.max(1) as f64;
        self.sq_err.iter().map(|s| (s / n).sqrt()).collect()
    }
}

/// Noiseless DOA on a `cols × rows` lattice of cell centres over the 6 × 6 m
/// workspace, flattened as `[x, y, angle]`; angle is NaN where the gradient
/// vanishes.
#[wasm_bindgen]
pub fn doa_field(cols: usize, rows: usize, path_loss_n: f64) -> Result<Vec<f64>, String> {
    if cols == 0 || rows == 0 {
        return Err("lattice needs at least one row and column".into());
    }
    let ws = Workspace::default();
    let m = PathLossModel::new(-40.0, path_loss_n, 0.0).map_err(err)?;
    let (w, h) = (ws.width(), ws.height());
    let mut out = Vec::with_capacity(cols * rows * 3);
    for j in 0..rows {
        for i in 0..cols {
            let p = Point2::new((i as f64 + 0.5) * w / cols as f64, (j as f64 + 0.5) * h / rows as f64);
            out.extend([p.x, p.y, ws.layout().predicted_doa(&m, p).unwrap_or(f64::NAN)]);
        }
    }
    Ok(out)
}

/// Draws one noisy snapshot at `(x, y)` and localizes it with D-RSS,
/// trilateration and WCL. Returns `[drss_x, drss_y, tri_x, tri_y, wcl_x,
/// wcl_y]`.
#[wasm_bindgen]
pub fn locate_once(x: f64, y: f64, noise_std: f64, seed: u64) -> Result<Vec<f64>, String> {
    let ws = Workspace::default();
    let truth = Point2::new(x, y);
    if !ws.bounds().contains(truth) {
        return Err(format!("({x}, {y}) lies outside the workspace"));
    }
    let m = model(noise_std)?;
    let mut rng = rng_for(seed, 0x51);
    let rssi = ws
        .layout()
        .positions()
        .map(|a| m.sample_rssi(a.distance(truth), &mut rng))
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?;
    let snap = RssiSnapshot::new(0, rssi, Some(truth));
    let ctx = EstimatorContext { bounds: ws.bounds(), layout: ws.layout(), model: &m };
    let settings = EstimatorSettings::default();
    let mut out = Vec::with_capacity(6);
    for k in [EstimatorKind::Drss, EstimatorKind::Trilateration, EstimatorKind::Wcl] {
        let p = build_estimator(k, ctx, &settings, seed).map_err(err)?.step(&snap, None).map_err(err)?;
        out.extend([p.x, p.y]);
    }
    Ok(out)
}
