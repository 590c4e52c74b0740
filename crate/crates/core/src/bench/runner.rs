use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::estimators::{build_estimator, EstimatorContext, EstimatorKind};
use super::{ExperimentPlan, Realization, ScenarioSource};
use crate::{Error, Result};

/// Outcome of one trial of one estimator on one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub estimator: EstimatorKind,
    pub scenario: String,
    pub trial: usize,
    pub rmse_m: f64,
    pub tpi_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialFailure {
    pub estimator: EstimatorKind,
    pub scenario: String,
    pub trial: usize,
    pub error: String,
}

/// Aggregate over the successful trials of one (estimator, scenario) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub estimator: String,
    pub scenario: String,
    pub rmse_m: f64,
    pub rmse_std_m: f64,
    pub tpi_ms: f64,
    pub tpi_std_ms: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentReport {
    pub trials: Vec<TrialResult>,
    pub records: Vec<BenchmarkRecord>,
    pub failures: Vec<TrialFailure>,
}

impl ExperimentReport {
    pub fn rmses(&self, estimator: EstimatorKind, scenario: &str) -> Vec<f64> {
        self.select(estimator, scenario).map(|t| t.rmse_m).collect()
    }

    pub fn tpis(&self, estimator: EstimatorKind, scenario: &str) -> Vec<f64> {
        self.select(estimator, scenario).map(|t| t.tpi_ms).collect()
    }

    pub fn median_rmse(&self, estimator: EstimatorKind, scenario: &str) -> Option<f64> {
        median(&self.rmses(estimator, scenario))
    }

    pub fn record(&self, estimator: EstimatorKind, scenario: &str) -> Option<&BenchmarkRecord> {
        self.records.iter().find(|r| r.estimator == estimator.id() && r.scenario == scenario)
    }

    fn select<'a>(&'a self, estimator: EstimatorKind, scenario: &'a str) -> impl Iterator<Item = &'a TrialResult> + 'a {
        self.trials.iter().filter(move |t| t.estimator == estimator && t.scenario == scenario)
    }
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn run_trial(
    plan: &ExperimentPlan,
    estimator: EstimatorKind,
    scenario: usize,
    trial: usize,
    input: &Realization,
) -> Result<TrialResult> {
    let sc = &plan.scenarios[scenario];
    let seed = plan.base_seed.wrapping_add(trial as u64);
    let ctx = EstimatorContext { bounds: sc.bounds(), layout: sc.layout(), model: &sc.model };
    let mut est = build_estimator(estimator, ctx, &plan.settings, seed)?;

    let mut sq = 0.0;
    let mut scored = 0usize;
    let mut elapsed = 0.0;
    for (snap, odo) in input.snapshots.iter().zip(&input.odometry) {
        let start = Instant::now();
        let p = est.step(snap, *odo)?;
        elapsed += start.elapsed().as_secs_f64();
        if !p.is_finite() {
            return Err(Error::NonFinite("estimate"));
        }
        if let Some(truth) = snap.true_position {
            sq += (p - truth).norm().powi(2);
            scored += 1;
        }
    }
    if scored == 0 {
        return Err(Error::Empty("ground-truth positions"));
    }
    Ok(TrialResult {
        estimator,
        scenario: sc.name.clone(),
        trial,
        rmse_m: (sq / scored as f64).sqrt(),
        tpi_ms: 1e3 * elapsed / input.snapshots.len() as f64,
    })
}

/// Runs every estimator on every scenario for `plan.trials` trials.
///
/// Trial `t` of every estimator sees the same stream (seed `base + t`), and
/// every trial starts from a freshly built estimator. Failed trials are
/// listed in the report and left out of the aggregates.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentReport> {
    plan.validate()?;
    let streams: Vec<Vec<Realization>> = plan
        .scenarios
        .iter()
        .map(|sc| (0..plan.trials).map(|t| sc.realize(plan.base_seed.wrapping_add(t as u64))).collect())
        .collect::<Result<_>>()?;

    let jobs: Vec<(usize, EstimatorKind, usize)> = (0..plan.scenarios.len())
        .flat_map(|s| plan.estimators.iter().flat_map(move |&e| (0..plan.trials).map(move |t| (s, e, t))))
        .collect();
    let exec = |&(s, e, t): &(usize, EstimatorKind, usize)| {
        run_trial(plan, e, s, t, &streams[s][t]).map_err(|err| TrialFailure {
            estimator: e,
            scenario: plan.scenarios[s].name.clone(),
            trial: t,
            error: err.to_string(),
        })
    };
    let outcomes: Vec<std::result::Result<TrialResult, TrialFailure>> = run_jobs(&jobs, plan.precise_timing, exec);

    let mut report = ExperimentReport::default();
    for o in outcomes {
        match o {
            Ok(t) => report.trials.push(t),
            Err(f) => report.failures.push(f),
        }
    }
    for sc in &plan.scenarios {
        for &e in &plan.estimators {
            let rmse = report.rmses(e, &sc.name);
            if rmse.is_empty() {
                continue;
            }
            let (rmse_m, rmse_std_m) = mean_std(&rmse);
            let (tpi_ms, tpi_std_ms) = mean_std(&report.tpis(e, &sc.name));
            report.records.push(BenchmarkRecord {
                estimator: e.id().to_string(),
                scenario: sc.name.clone(),
                rmse_m,
                rmse_std_m,
                tpi_ms,
                tpi_std_ms,
                trials: rmse.len(),
            });
        }
    }
    Ok(report)
}

#[cfg(feature = "parallel")]
fn run_jobs<J: Sync, O: Send>(jobs: &[J], sequential: bool, f: impl Fn(&J) -> O + Sync + Send) -> Vec<O> {
    use rayon::prelude::*;
    if sequential {
        jobs.iter().map(f).collect()
    } else {
        jobs.par_iter().map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
fn run_jobs<J, O>(jobs: &[J], _sequential: bool, f: impl Fn(&J) -> O) -> Vec<O> {
    jobs.iter().map(f).collect()
}

/// Parameter varied by [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Particle count of the filter.
    Particles,
    /// Path-loss exponent of both the simulated truth and the estimators'
    /// model.
    PathLossN,
    /// Grid spacing of the Markov and D-RSS grids, also used as the particle
    /// jitter.
    Resolution,
    /// Measurement noise std of simulated scenarios, dBm.
    NoiseStd,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Particles => "particles",
            SweepParameter::PathLossN => "path_loss_n",
            SweepParameter::Resolution => "resolution",
            SweepParameter::NoiseStd => "noise_std",
        }
    }

    /// Copy of `plan` with this parameter set to `value`.
    pub fn apply(self, plan: &ExperimentPlan, value: f64) -> Result<ExperimentPlan> {
        if !value.is_finite() {
            return Err(Error::InvalidConfig(format!("{} value must be finite", self.name())));
        }
        let mut p = plan.clone();
        match self {
            SweepParameter::Particles => {
                if value < 2.0 || value.fract() != 0.0 {
                    return Err(Error::InvalidConfig(format!("particle count must be an integer ≥ 2, got {value}")));
                }
                p.settings.pf.num_particles = value as usize;
            }
            SweepParameter::PathLossN => {
                for sc in &mut p.scenarios {
                    sc.model = sc.model.with_exponent(value)?;
                    if let ScenarioSource::Simulated { truth, .. } = &mut sc.source {
                        *truth = truth.with_exponent(value)?;
                    }
                }
            }
            SweepParameter::Resolution => {
                if value <= 0.0 {
                    return Err(Error::InvalidConfig(format!("resolution must be positive, got {value}")));
                }
                p.settings.markov.resolution = value;
                p.settings.drss_resolution = value;
                p.settings.pf.jitter_std = value;
            }
            SweepParameter::NoiseStd => {
                for sc in &mut p.scenarios {
                    match &mut sc.source {
                        ScenarioSource::Simulated { truth, .. } => *truth = truth.with_noise_std(value)?,
                        ScenarioSource::Recorded { .. } => {
                            return Err(Error::InvalidConfig(format!(
                                "noise sweep needs simulated scenarios; `{}` is recorded",
                                sc.name
                            )))
                        }
                    }
                }
            }
        }
        Ok(p)
    }
}

impl std::str::FromStr for SweepParameter {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "particles" | "num_particles" => Ok(SweepParameter::Particles),
            "path_loss_n" | "n" => Ok(SweepParameter::PathLossN),
            "resolution" => Ok(SweepParameter::Resolution),
            "noise_std" | "noise" => Ok(SweepParameter::NoiseStd),
            _ => Err(Error::InvalidConfig(format!("unknown sweep parameter `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub parameter: SweepParameter,
    pub value: f64,
    pub report: ExperimentReport,
}

/// Runs `plan` once per value with everything else fixed. The seed schedule
/// is the same for every value, so trial `t` sees the same randomness
/// throughout the sweep.
pub fn sweep(plan: &ExperimentPlan, parameter: SweepParameter, values: &[f64]) -> Result<Vec<SweepPoint>> {
    if values.is_empty() {
        return Err(Error::Empty("sweep grid"));
    }
    let plans = values.iter().map(|&v| parameter.apply(plan, v)).collect::<Result<Vec<_>>>()?;
    plans
        .iter()
        .zip(values)
        .map(|(p, &value)| Ok(SweepPoint { parameter, value, report: run_experiment(p)? }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::Scenario;
    use crate::radio::PathLossModel;
    use crate::sim::{generate_trajectory, TrajectoryKind, Workspace};

    fn plan(estimators: Vec<EstimatorKind>, trials: usize) -> ExperimentPlan {
        let truth = PathLossModel::new(-40.0, 3.0, 2.0).unwrap();
        let sc = Scenario::simulated(Workspace::default(), TrajectoryKind::Diagonal, 0.25, truth).unwrap();
        ExperimentPlan { trials, ..ExperimentPlan::new(vec![sc], estimators) }
    }

    #[test]
    fn oracle_rmse_is_zero() {
        let r = run_experiment(&plan(vec![EstimatorKind::Oracle], 3)).unwrap();
        assert_eq!(r.records.len(), 1);
        assert_eq!(r.records[0].rmse_m, 0.0);
        assert_eq!(r.records[0].trials, 3);
    }

    #[test]
    fn static_center_matches_closed_form() {
        let ws = Workspace::default();
        let t = generate_trajectory(&ws, TrajectoryKind::Diagonal, 0.25).unwrap();
        let c = ws.bounds().center();
        let expected =
            (t.waypoints.iter().map(|p| p.distance(c).powi(2)).sum::<f64>() / t.waypoints.len() as f64).sqrt();
        let r = run_experiment(&plan(vec![EstimatorKind::StaticCenter], 1)).unwrap();
        assert!((r.records[0].rmse_m - expected).abs() < 1e-12);
    }

    #[test]
    fn single_trial_has_zero_spread() {
        let r = run_experiment(&plan(vec![EstimatorKind::Wcl], 1)).unwrap();
        assert_eq!(r.records[0].rmse_std_m, 0.0);
        assert_eq!(r.records[0].tpi_std_ms, 0.0);
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(run_experiment(&plan(vec![EstimatorKind::Wcl], 0)).is_err());
        assert!(sweep(&plan(vec![EstimatorKind::Wcl], 1), SweepParameter::Particles, &[]).is_err());
    }

    #[test]
    fn failures_are_counted_not_aggregated() {
        let mut p = plan(vec![EstimatorKind::Oracle], 2);
        if let ScenarioSource::Simulated { .. } = p.scenarios[0].source {
            let snaps = p.scenarios[0].realize(0).unwrap().snapshots;
            let stripped = snaps.into_iter().map(|mut s| {
                s.true_position = None;
                s
            });
            p.scenarios[0].source = ScenarioSource::Recorded { snapshots: stripped.collect() };
        }
        let r = run_experiment(&p).unwrap();
        assert_eq!(r.failures.len(), 2);
        assert!(r.records.is_empty());
    }

    #[test]
    fn single_value_sweep_equals_run() {
        let p = plan(vec![EstimatorKind::PfDoa, EstimatorKind::Drss], 2);
        let s = sweep(&p, SweepParameter::Particles, &[200.0]).unwrap();
        let r = run_experiment(&p).unwrap();
        let rm = |r: &ExperimentReport| r.trials.iter().map(|t| t.rmse_m).collect::<Vec<_>>();
        assert_eq!(rm(&s[0].report), rm(&r));
    }

    #[test]
    fn sweep_parameter_validation() {
        let p = plan(vec![EstimatorKind::Wcl], 1);
        assert!(SweepParameter::Particles.apply(&p, 10.5).is_err());
        assert!(SweepParameter::Resolution.apply(&p, 0.0).is_err());
        assert!(SweepParameter::PathLossN.apply(&p, -1.0).is_err());
        let q = SweepParameter::NoiseStd.apply(&p, 4.0).unwrap();
        match &q.scenarios[0].source {
            ScenarioSource::Simulated { truth, .. } => assert_eq!(truth.noise_std_dbm(), 4.0),
            _ => unreachable!(),
        }
        assert_eq!("n".parse::<SweepParameter>().unwrap(), SweepParameter::PathLossN);
    }

    #[test]
    fn median_values() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }
}
