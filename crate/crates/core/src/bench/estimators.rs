use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{trilaterate, weighted_centroid, DrssLocator, GridSpec, MarkovConfig, MarkovTracker};
use crate::doa::{AnchorLayout, DoaSmoother, RssiSnapshot, SmoothingConfig};
use crate::pf::{MeasurementTuple, ParticleFilter, PfConfig, PointEstimate};
use crate::radio::PathLossModel;
use crate::{Error, Point2, Rect, Result};

/// Online position estimator driven one snapshot at a time.
pub trait Estimator {
    fn step(&mut self, snapshot: &RssiSnapshot, odometry: Option<Point2>) -> Result<Point2>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    PfDoa,
    Markov,
    Drss,
    Trilateration,
    Wcl,
    /// Returns the ground truth.
    Oracle,
    /// Always answers the workspace centre.
    StaticCenter,
}

impl EstimatorKind {
    /// The comparison set, in table order.
    pub const STANDARD: [EstimatorKind; 5] = [
        EstimatorKind::PfDoa,
        EstimatorKind::Markov,
        EstimatorKind::Drss,
        EstimatorKind::Trilateration,
        EstimatorKind::Wcl,
    ];

    pub fn id(self) -> &'static str {
        match self {
            EstimatorKind::PfDoa => "pf-doa",
            EstimatorKind::Markov => "markov",
            EstimatorKind::Drss => "drss",
            EstimatorKind::Trilateration => "trilateration",
            EstimatorKind::Wcl => "wcl",
            EstimatorKind::Oracle => "oracle",
            EstimatorKind::StaticCenter => "static-center",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            EstimatorKind::PfDoa => "PF-DOA",
            EstimatorKind::Markov => "Markov",
            EstimatorKind::Drss => "D-RSS",
            EstimatorKind::Trilateration => "Trilateration",
            EstimatorKind::Wcl => "WCL",
            EstimatorKind::Oracle => "Oracle",
            EstimatorKind::StaticCenter => "Static centre",
        }
    }

    pub fn all() -> [EstimatorKind; 7] {
        [
            EstimatorKind::PfDoa,
            EstimatorKind::Markov,
            EstimatorKind::Drss,
            EstimatorKind::Trilateration,
            EstimatorKind::Wcl,
            EstimatorKind::Oracle,
            EstimatorKind::StaticCenter,
        ]
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        let alias = match key.as_str() {
            "pf" | "pfdoa" => "pf-doa",
            "d-rss" => "drss",
            "markov-grid" | "grid" => "markov",
            "centroid" | "weighted-centroid" => "wcl",
            "trilat" => "trilateration",
            other => other,
        };
        EstimatorKind::all().into_iter().find(|k| k.id() == alias).ok_or_else(|| Error::UnknownEstimator(s.to_string()))
    }
}

/// Parameters shared by every estimator built for one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorSettings {
    pub pf: PfConfig,
    pub smoothing: SmoothingConfig,
    pub markov: MarkovConfig,
    /// Grid spacing of the D-RSS templates, meters.
    pub drss_resolution: f64,
    /// Feed odometry displacements to the tracking filters.
    pub odometry: bool,
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        Self {
            pf: PfConfig::default(),
            smoothing: SmoothingConfig::default(),
            markov: MarkovConfig::default(),
            drss_resolution: 0.1,
            odometry: false,
        }
    }
}

impl EstimatorSettings {
    /// Profile used for the simulated benchmark: odometry fused into both
    /// tracking filters, σ = 0.3 rad for both likelihoods, unsmoothed DOA and
    /// the weighted-mean particle estimate.
    pub fn calibrated() -> Self {
        let sigma = 0.3;
        Self {
            pf: PfConfig { sigma, estimate: PointEstimate::WeightedMean, ..PfConfig::default() },
            smoothing: SmoothingConfig::new(1, SmoothingConfig::DEFAULT_DECAY).expect("valid smoothing"),
            markov: MarkovConfig { sigma, ..MarkovConfig::default() },
            drss_resolution: 0.1,
            odometry: true,
        }
    }
}

/// Everything an estimator may know about the scenario it runs on.
#[derive(Debug, Clone, Copy)]
pub struct EstimatorContext<'a> {
    pub bounds: Rect,
    pub layout: &'a AnchorLayout,
    pub model: &'a PathLossModel,
}

/// Builds a fresh estimator; `seed` drives any internal randomness.
pub fn build_estimator(
    kind: EstimatorKind,
    ctx: EstimatorContext<'_>,
    settings: &EstimatorSettings,
    seed: u64,
) -> Result<Box<dyn Estimator + Send>> {
    let layout = ctx.layout.clone();
    let model = *ctx.model;
    Ok(match kind {
        EstimatorKind::PfDoa => {
            let config = PfConfig { seed, ..settings.pf.clone() };
            Box::new(PfDoaEstimator {
                smoother: DoaSmoother::new(settings.smoothing),
                filter: ParticleFilter::new(ctx.bounds, layout, model, config)?,
                odometry: settings.odometry,
            })
        }
        EstimatorKind::Markov => Box::new(MarkovEstimator {
            smoother: DoaSmoother::new(settings.smoothing),
            layout: layout.clone(),
            tracker: MarkovTracker::new(ctx.bounds, layout, model, settings.markov.clone())?,
            odometry: settings.odometry,
        }),
        EstimatorKind::Drss => {
            let grid = GridSpec::new(settings.drss_resolution, ctx.bounds)?;
            Box::new(DrssEstimator { locator: DrssLocator::new(&layout, &model, grid)? })
        }
        EstimatorKind::Trilateration => {
            Box::new(TrilaterationEstimator { anchors: layout.positions().collect(), model })
        }
        EstimatorKind::Wcl => Box::new(WclEstimator { anchors: layout.positions().collect() }),
        EstimatorKind::Oracle => Box::new(OracleEstimator),
        EstimatorKind::StaticCenter => Box::new(StaticCenterEstimator { center: ctx.bounds.center() }),
    })
}

/// DOA smoothing followed by the particle filter.
pub struct PfDoaEstimator {
    smoother: DoaSmoother,
    filter: ParticleFilter,
    odometry: bool,
}

impl PfDoaEstimator {
    pub fn filter(&self) -> &ParticleFilter {
        &self.filter
    }
}

impl Estimator for PfDoaEstimator {
    fn step(&mut self, snapshot: &RssiSnapshot, odometry: Option<Point2>) -> Result<Point2> {
        let doa = self.smoother.push(self.filter.layout(), snapshot)?;
        let m = MeasurementTuple {
            snapshot: snapshot.clone(),
            smoothed_doa: doa,
            odometry_delta: odometry.filter(|_| self.odometry),
        };
        self.filter.step(&m)
    }
}

pub struct MarkovEstimator {
    smoother: DoaSmoother,
    layout: AnchorLayout,
    tracker: MarkovTracker,
    odometry: bool,
}

impl Estimator for MarkovEstimator {
    fn step(&mut self, snapshot: &RssiSnapshot, odometry: Option<Point2>) -> Result<Point2> {
        let doa = self.smoother.push(&self.layout, snapshot)?;
        let m = MeasurementTuple {
            snapshot: snapshot.clone(),
            smoothed_doa: doa,
            odometry_delta: odometry.filter(|_| self.odometry),
        };
        self.tracker.step(&m)
    }
}

pub struct DrssEstimator {
    locator: DrssLocator,
}

impl Estimator for DrssEstimator {
    fn step(&mut self, snapshot: &RssiSnapshot, _: Option<Point2>) -> Result<Point2> {
        self.locator.locate(&snapshot.rssi_by_anchor)
    }
}

pub struct TrilaterationEstimator {
    anchors: Vec<Point2>,
    model: PathLossModel,
}

impl Estimator for TrilaterationEstimator {
    fn step(&mut self, snapshot: &RssiSnapshot, _: Option<Point2>) -> Result<Point2> {
        let d: Vec<f64> = snapshot.rssi_by_anchor.iter().map(|&r| self.model.invert_rssi_to_distance(r)).collect();
        Ok(trilaterate(&self.anchors, &d)?.position)
    }
}

pub struct WclEstimator {
    anchors: Vec<Point2>,
}

impl Estimator for WclEstimator {
    fn step(&mut self, snapshot: &RssiSnapshot, _: Option<Point2>) -> Result<Point2> {
        weighted_centroid(&self.anchors, &snapshot.rssi_by_anchor)
    }
}

pub struct OracleEstimator;

impl Estimator for OracleEstimator {
    fn step(&mut self, snapshot: &RssiSnapshot, _: Option<Point2>) -> Result<Point2> {
        snapshot.true_position.ok_or(Error::Empty("oracle needs ground truth"))
    }
}

pub struct StaticCenterEstimator {
    center: Point2,
}

impl Estimator for StaticCenterEstimator {
    fn step(&mut self, _: &RssiSnapshot, _: Option<Point2>) -> Result<Point2> {
        Ok(self.center)
    }
}
