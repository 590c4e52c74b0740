use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::estimators::{EstimatorKind, EstimatorSettings};
use super::runner::SweepParameter;
use super::{ExperimentPlan, Scenario};
use crate::datasets::{calibrate_model, load_scenario, ScenarioDescriptor};
use crate::radio::PathLossModel;
use crate::sim::{TrajectoryKind, TrajectoryParams, Workspace, DEFAULT_ODOMETRY_NOISE_STD, DEFAULT_STEP_LENGTH};
use crate::{Error, Result};

/// On-disk experiment plan (TOML).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanFile {
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<EstimatorKind>,
    #[serde(default)]
    pub precise_timing: bool,
    #[serde(default)]
    pub settings: EstimatorSettings,
    pub scenarios: Vec<ScenarioEntry>,
    #[serde(default)]
    pub sweep: Option<SweepEntry>,
}

fn default_trials() -> usize {
    ExperimentPlan::DEFAULT_TRIALS
}

fn default_estimators() -> Vec<EstimatorKind> {
    EstimatorKind::STANDARD.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioEntry {
    Simulated {
        #[serde(default)]
        name: Option<String>,
        trajectory: TrajectoryKind,
        #[serde(default = "default_side")]
        width: f64,
        #[serde(default = "default_side")]
        height: f64,
        #[serde(default = "default_step")]
        step_length: f64,
        #[serde(default)]
        trajectory_params: TrajectoryParams,
        #[serde(default = "default_truth")]
        model: PathLossModel,
        #[serde(default = "default_odometry_noise")]
        odometry_noise_std: f64,
    },
    Dataset {
        /// Scenario descriptor, relative to the plan file.
        descriptor: PathBuf,
        #[serde(default = "default_odometry_noise")]
        odometry_noise_std: f64,
    },
}

fn default_side() -> f64 {
    6.0
}

fn default_step() -> f64 {
    DEFAULT_STEP_LENGTH
}

fn default_truth() -> PathLossModel {
    PathLossModel::new(-40.0, 3.0, 2.0).expect("valid model")
}

fn default_odometry_noise() -> f64 {
    DEFAULT_ODOMETRY_NOISE_STD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepEntry {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

impl PlanFile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let plan: PlanFile = toml::from_str(text)?;
        if let Some(s) = &plan.sweep {
            if s.values.is_empty() {
                return Err(Error::Empty("sweep grid"));
            }
        }
        Ok(plan)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("plan serializes")
    }

    /// Loads every scenario; relative descriptor paths resolve against
    /// `base_dir`.
    pub fn resolve(&self, base_dir: &Path) -> Result<ExperimentPlan> {
        let scenarios = self.scenarios.iter().map(|s| resolve_scenario(s, base_dir)).collect::<Result<Vec<_>>>()?;
        let plan = ExperimentPlan {
            scenarios,
            estimators: self.estimators.clone(),
            trials: self.trials,
            base_seed: self.seed,
            settings: self.settings.clone(),
            precise_timing: self.precise_timing,
        };
        plan.validate()?;
        Ok(plan)
    }
}

fn resolve_scenario(entry: &ScenarioEntry, base_dir: &Path) -> Result<Scenario> {
    match entry {
        ScenarioEntry::Simulated {
            name,
            trajectory,
            width,
            height,
            step_length,
            trajectory_params,
            model,
            odometry_noise_std,
        } => {
            let ws = Workspace::four_corner(*width, *height)?;
            let mut sc = Scenario::simulated_with(ws, *trajectory, *step_length, *trajectory_params, *model)?;
            if let Some(n) = name {
                sc.name = n.clone();
            }
            sc.odometry_noise_std = *odometry_noise_std;
            Ok(sc)
        }
        ScenarioEntry::Dataset { descriptor, odometry_noise_std } => {
            let path = if descriptor.is_relative() { base_dir.join(descriptor) } else { descriptor.clone() };
            let d = ScenarioDescriptor::from_file(&path)?;
            let data = d
                .data
                .clone()
                .ok_or_else(|| Error::InvalidConfig(format!("descriptor `{}` names no data file", d.name)))?;
            let loaded = load_scenario(&data, &d)?;
            let model = match d.model {
                Some(m) => m,
                None => calibrate_model(&loaded.snapshots, d.layout())?,
            };
            let mut sc = Scenario::recorded(d.name.clone(), d.workspace.clone(), loaded.snapshots, model);
            sc.odometry_noise_std = *odometry_noise_std;
            Ok(sc)
        }
    }
}
