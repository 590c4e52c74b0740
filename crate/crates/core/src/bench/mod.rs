//! Experiment harness: repeated trials of each estimator on each scenario,
//! RMSE and time-per-iteration metrics, parameter sweeps and result files.

mod estimators;
mod plan;
mod report;
mod runner;

pub use estimators::{build_estimator, Estimator, EstimatorContext, EstimatorKind, EstimatorSettings, PfDoaEstimator};
pub use plan::{PlanFile, ScenarioEntry, SweepEntry};
pub use report::{
    read_results_csv, read_results_csv_from, render_summary, write_results_csv, write_results_csv_to, write_sweep_csv,
    write_sweep_csv_to, RESULTS_HEADER, SWEEP_HEADER,
};
pub use runner::{
    median, run_experiment, sweep, BenchmarkRecord, ExperimentReport, SweepParameter, SweepPoint, TrialFailure,
    TrialResult,
};

use crate::doa::{AnchorLayout, RssiSnapshot};
use crate::radio::PathLossModel;
use crate::sim::{
    generate_trajectory_with, odometry_from_truth, simulate_stream, Trajectory, TrajectoryKind, TrajectoryParams,
    Workspace, DEFAULT_ODOMETRY_NOISE_STD, DEFAULT_STEP_LENGTH,
};
use crate::{Error, Point2, Rect, Result};

/// Where a scenario's measurement stream comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioSource {
    /// A fresh noisy stream per trial, drawn from `truth` along `trajectory`.
    Simulated { trajectory: Trajectory, truth: PathLossModel },
    /// A fixed recorded stream, identical in every trial.
    Recorded { snapshots: Vec<RssiSnapshot> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub workspace: Workspace,
    pub source: ScenarioSource,
    /// Propagation model assumed by the model-based estimators.
    pub model: PathLossModel,
    /// Per-axis std of the synthetic odometry noise, meters.
    pub odometry_noise_std: f64,
}

/// One trial's input: the snapshots and the odometry displacement preceding
/// each of them.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub snapshots: Vec<RssiSnapshot>,
    pub odometry: Vec<Option<Point2>>,
}

impl Scenario {
    /// Simulated scenario on the default trajectory parameters; the
    /// estimators assume the noiseless truth model.
    pub fn simulated(
        workspace: Workspace,
        kind: TrajectoryKind,
        step_length: f64,
        truth: PathLossModel,
    ) -> Result<Self> {
        Self::simulated_with(workspace, kind, step_length, TrajectoryParams::default(), truth)
    }

    pub fn simulated_with(
        workspace: Workspace,
        kind: TrajectoryKind,
        step_length: f64,
        params: TrajectoryParams,
        truth: PathLossModel,
    ) -> Result<Self> {
        let trajectory = generate_trajectory_with(&workspace, kind, step_length, params)?;
        Ok(Self {
            name: format!("sim-{}", kind.name()),
            workspace,
            model: truth.with_noise_std(0.0)?,
            source: ScenarioSource::Simulated { trajectory, truth },
            odometry_noise_std: DEFAULT_ODOMETRY_NOISE_STD,
        })
    }

    /// The three simulated trajectories on the default 6 × 6 m workspace.
    pub fn simulated_suite(truth: PathLossModel) -> Result<Vec<Self>> {
        TrajectoryKind::SIMULATED
            .iter()
            .map(|&k| Self::simulated(Workspace::default(), k, DEFAULT_STEP_LENGTH, truth))
            .collect()
    }

    pub fn recorded(
        name: impl Into<String>,
        workspace: Workspace,
        snapshots: Vec<RssiSnapshot>,
        model: PathLossModel,
    ) -> Self {
        Self {
            name: name.into(),
            workspace,
            source: ScenarioSource::Recorded { snapshots },
            model,
            odometry_noise_std: DEFAULT_ODOMETRY_NOISE_STD,
        }
    }

    pub fn bounds(&self) -> Rect {
        self.workspace.bounds()
    }

    pub fn layout(&self) -> &AnchorLayout {
        self.workspace.layout()
    }

    /// The measurement stream and odometry of trial seed `seed`.
    pub fn realize(&self, seed: u64) -> Result<Realization> {
        let snapshots = match &self.source {
            ScenarioSource::Simulated { trajectory, truth } => {
                simulate_stream(&self.workspace, trajectory, truth, seed)?
            }
            ScenarioSource::Recorded { snapshots } => snapshots.clone(),
        };
        if snapshots.is_empty() {
            return Err(Error::Empty("scenario stream"));
        }
        let mut rng = crate::rng_for(seed, 0x0d0);
        let odometry = odometry_from_truth(&snapshots, self.odometry_noise_std, &mut rng)?;
        Ok(Realization { snapshots, odometry })
    }
}

/// A full experiment: every estimator on every scenario for `trials` seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub scenarios: Vec<Scenario>,
    pub estimators: Vec<EstimatorKind>,
    pub trials: usize,
    /// Trial `t` uses seed `base_seed + t`.
    pub base_seed: u64,
    pub settings: EstimatorSettings,
    /// Run trials sequentially on one thread so TPI is not skewed by
    /// contention.
    pub precise_timing: bool,
}

impl ExperimentPlan {
    pub const DEFAULT_TRIALS: usize = 100;

    pub fn new(scenarios: Vec<Scenario>, estimators: Vec<EstimatorKind>) -> Self {
        Self {
            scenarios,
            estimators,
            trials: Self::DEFAULT_TRIALS,
            base_seed: 0,
            settings: EstimatorSettings::default(),
            precise_timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.scenarios.is_empty() {
            return Err(Error::Empty("experiment scenarios"));
        }
        if self.estimators.is_empty() {
            return Err(Error::Empty("experiment estimators"));
        }
        self.settings.pf.validate()?;
        if !(self.settings.drss_resolution.is_finite() && self.settings.drss_resolution > 0.0) {
            return Err(Error::InvalidConfig("drss_resolution must be positive".into()));
        }
        Ok(())
    }
}
