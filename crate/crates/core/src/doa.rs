//! Direction of arrival from the spatial RSSI gradient across the anchors.
//!
//! The gradient is a fixed linear stencil over the per-anchor readings: the
//! four-corner central difference for rectangular layouts, or the slope of a
//! least-squares plane fit for arbitrary layouts of three or more anchors. The
//! angle of the gradient points toward the transmitter, and a short
//! exponentially weighted circular mean suppresses per-sample noise.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::geometry::wrap_angle;
use crate::radio::PathLossModel;
use crate::{Error, Point2, Rect, Result};

/// Gradients with a smaller norm (dBm/m) carry no usable direction.
pub const GRADIENT_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutKind {
    FourCorner,
    General,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub id: String,
    pub position: Point2,
}

impl Anchor {
    pub fn new(id: impl Into<String>, position: Point2) -> Self {
        Self { id: id.into(), position }
    }
}

/// Fixed anchors plus the precomputed gradient stencil.
///
/// Four-corner layouts are ordered N1 bottom-left, N2 top-left, N3 top-right,
/// N4 bottom-right.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorLayout {
    anchors: Vec<Anchor>,
    delta_x: f64,
    delta_y: f64,
    kind: LayoutKind,
    // g = (Σ sx_j·S_j, Σ sy_j·S_j)
    stencil_x: Vec<f64>,
    stencil_y: Vec<f64>,
}

impl AnchorLayout {
    /// Four anchors on the corners of `bounds`.
    pub fn four_corner_rect(bounds: Rect) -> Self {
        let (lo, hi) = (bounds.min, bounds.max);
        let anchors = vec![
            Anchor::new("N1", lo),
            Anchor::new("N2", Point2::new(lo.x, hi.y)),
            Anchor::new("N3", hi),
            Anchor::new("N4", Point2::new(hi.x, lo.y)),
        ];
        Self::four_corner(anchors).expect("rectangle corners form a valid layout")
    }

    /// Validates that `anchors` are the N1..N4 corners of an axis-aligned
    /// rectangle.
    pub fn four_corner(anchors: Vec<Anchor>) -> Result<Self> {
        if anchors.len() != 4 {
            return Err(Error::InvalidLayout(format!(
                "four-corner layout needs exactly 4 anchors, got {}",
                anchors.len()
            )));
        }
        check_finite(&anchors)?;
        let p: Vec<Point2> = anchors.iter().map(|a| a.position).collect();
        let dx = p[3].x - p[0].x;
        let dy = p[1].y - p[0].y;
        let tol = 1e-9 * (1.0 + dx.abs() + dy.abs());
        let corners_ok = (p[1].x - p[0].x).abs() <= tol
            && (p[2].x - p[3].x).abs() <= tol
            && (p[2].y - p[1].y).abs() <= tol
            && (p[3].y - p[0].y).abs() <= tol
            && (p[2].x - p[1].x - dx).abs() <= tol
            && (p[2].y - p[3].y - dy).abs() <= tol;
        if !corners_ok || dx <= 0.0 || dy <= 0.0 {
            return Err(Error::InvalidLayout(
                "anchors must be bottom-left, top-left, top-right, bottom-right corners of a rectangle".into(),
            ));
        }
        let sx = 1.0 / (2.0 * dx);
        let sy = 1.0 / (2.0 * dy);
        Ok(Self {
            anchors,
            delta_x: dx,
            delta_y: dy,
            kind: LayoutKind::FourCorner,
            // g_x = (S3 - S2)/(2Δx) + (S4 - S1)/(2Δx)
            stencil_x: vec![-sx, -sx, sx, sx],
            // g_y = (S3 - S4)/(2Δy) + (S2 - S1)/(2Δy)
            stencil_y: vec![-sy, sy, sy, -sy],
        })
    }

    /// Three or more non-collinear anchors; the gradient is the slope of the
    /// least-squares plane through the readings.
    pub fn general(anchors: Vec<Anchor>) -> Result<Self> {
        if anchors.len() < 3 {
            return Err(Error::InvalidLayout(format!(
                "general layout needs at least 3 anchors, got {}",
                anchors.len()
            )));
        }
        check_finite(&anchors)?;
        let n = anchors.len() as f64;
        let mean = anchors.iter().fold(Point2::ZERO, |acc, a| acc + a.position) * (1.0 / n);
        let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
        for a in &anchors {
            let c = a.position - mean;
            sxx += c.x * c.x;
            sxy += c.x * c.y;
            syy += c.y * c.y;
        }
        let det = sxx * syy - sxy * sxy;
        let scale = (sxx + syy).powi(2);
        if scale == 0.0 || det <= 1e-12 * scale {
            return Err(Error::CollinearAnchors);
        }
        // slope = M^-1 · Σ c_j S_j with M the centred scatter matrix
        let (i11, i12, i22) = (syy / det, -sxy / det, sxx / det);
        let (stencil_x, stencil_y) = anchors
            .iter()
            .map(|a| {
                let c = a.position - mean;
                (i11 * c.x + i12 * c.y, i12 * c.x + i22 * c.y)
            })
            .unzip();
        let span = |coord: fn(&Point2) -> f64| {
            let (lo, hi) = anchors
                .iter()
                .map(|a| coord(&a.position))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
            hi - lo
        };
        let delta_x = span(|p| p.x);
        let delta_y = span(|p| p.y);
        Ok(Self { anchors, delta_x, delta_y, kind: LayoutKind::General, stencil_x, stencil_y })
    }

    pub fn anchors(&self) -> &[Anchor] {
        &self.anchors
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    pub fn positions(&self) -> impl Iterator<Item = Point2> + '_ {
        self.anchors.iter().map(|a| a.position)
    }

    pub fn kind(&self) -> LayoutKind {
        self.kind
    }

    pub fn delta_x(&self) -> f64 {
        self.delta_x
    }

    pub fn delta_y(&self) -> f64 {
        self.delta_y
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.anchors.iter().position(|a| a.id == id)
    }

    pub fn centroid(&self) -> Point2 {
        self.positions().fold(Point2::ZERO, |acc, p| acc + p) * (1.0 / self.len() as f64)
    }

    /// Gradient of an RSSI vector already known to match the layout.
    #[inline]
    pub(crate) fn gradient_of(&self, rssi: &[f64]) -> Point2 {
        let mut g = Point2::ZERO;
        for ((s, wx), wy) in rssi.iter().zip(&self.stencil_x).zip(&self.stencil_y) {
            g.x += wx * s;
            g.y += wy * s;
        }
        g
    }

    /// Noiseless direction of arrival the anchors would report for a device
    /// at `position`.
    pub fn predicted_doa(&self, model: &PathLossModel, position: Point2) -> Option<f64> {
        let mut g = Point2::ZERO;
        for ((a, wx), wy) in self.anchors.iter().zip(&self.stencil_x).zip(&self.stencil_y) {
            let s = model.rssi_between(position, a.position);
            g.x += wx * s;
            g.y += wy * s;
        }
        let (angle, valid) = doa_from_gradient(g);
        valid.then_some(angle)
    }

    /// Noiseless RSSI vector at `position`.
    pub fn predicted_rssi(&self, model: &PathLossModel, position: Point2) -> Vec<f64> {
        self.positions().map(|a| model.rssi_between(position, a)).collect()
    }
}

fn check_finite(anchors: &[Anchor]) -> Result<()> {
    if anchors.iter().all(|a| a.position.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite("anchor position"))
    }
}

/// One RSSI reading per anchor at a single time step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RssiSnapshot {
    pub timestamp_index: usize,
    pub rssi_by_anchor: Vec<f64>,
    pub true_position: Option<Point2>,
}

impl RssiSnapshot {
    pub fn new(timestamp_index: usize, rssi_by_anchor: Vec<f64>, true_position: Option<Point2>) -> Self {
        Self { timestamp_index, rssi_by_anchor, true_position }
    }

    pub fn validate(&self, layout: &AnchorLayout) -> Result<()> {
        if self.rssi_by_anchor.len() != layout.len() {
            return Err(Error::AnchorCountMismatch { expected: layout.len(), got: self.rssi_by_anchor.len() });
        }
        if self.rssi_by_anchor.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("rssi"));
        }
        Ok(())
    }
}

/// Smoothed direction of arrival. The angles are meaningless when `valid` is
/// false.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoaEstimate {
    pub raw_angle_rad: f64,
    pub smoothed_angle_rad: f64,
    pub gradient: Point2,
    pub valid: bool,
}

impl DoaEstimate {
    pub fn invalid(gradient: Point2) -> Self {
        Self { raw_angle_rad: 0.0, smoothed_angle_rad: 0.0, gradient, valid: false }
    }

    pub fn angle(&self) -> Option<f64> {
        self.valid.then_some(self.smoothed_angle_rad)
    }
}

/// RSSI gradient (dBm/m) of a snapshot over the layout.
pub fn rss_gradient(layout: &AnchorLayout, snapshot: &RssiSnapshot) -> Result<Point2> {
    snapshot.validate(layout)?;
    Ok(layout.gradient_of(&snapshot.rssi_by_anchor))
}

/// Quadrant-aware angle of the gradient in `(-π, π]`, plus whether the
/// gradient is large enough to define a direction.
pub fn doa_from_gradient(gradient: Point2) -> (f64, bool) {
    let valid = gradient.is_finite() && gradient.norm() >= GRADIENT_EPSILON;
    (wrap_angle(gradient.y.atan2(gradient.x)), valid)
}

/// Window and decay of the exponentially weighted circular mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSmoothing", into = "RawSmoothing")]
pub struct SmoothingConfig {
    window: usize,
    decay: f64,
    normalizer: f64,
}

#[derive(Serialize, Deserialize)]
struct RawSmoothing {
    window: usize,
    decay: f64,
}

impl TryFrom<RawSmoothing> for SmoothingConfig {
    type Error = Error;
    fn try_from(raw: RawSmoothing) -> Result<Self> {
        SmoothingConfig::new(raw.window, raw.decay)
    }
}

impl From<SmoothingConfig> for RawSmoothing {
    fn from(c: SmoothingConfig) -> Self {
        RawSmoothing { window: c.window, decay: c.decay }
    }
}

impl SmoothingConfig {
    pub const DEFAULT_WINDOW: usize = 10;
    pub const DEFAULT_DECAY: f64 = 0.99;

    pub fn new(window: usize, decay: f64) -> Result<Self> {
        if window == 0 {
            return Err(Error::InvalidConfig("smoothing window must be positive".into()));
        }
        if !(decay > 0.0 && decay <= 1.0) {
            return Err(Error::InvalidConfig(format!("smoothing decay must be in (0, 1], got {decay}")));
        }
        Ok(Self { window, decay, normalizer: normalizer(window, decay) })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    /// `1 / Σ_{i<window} decay^i`.
    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn set_window(&mut self, window: usize) -> Result<()> {
        *self = Self::new(window, self.decay)?;
        Ok(())
    }

    pub fn set_decay(&mut self, decay: f64) -> Result<()> {
        *self = Self::new(self.window, decay)?;
        Ok(())
    }
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        Self::new(Self::DEFAULT_WINDOW, Self::DEFAULT_DECAY).expect("default smoothing is valid")
    }
}

fn normalizer(window: usize, decay: f64) -> f64 {
    let mut w = 1.0;
    let mut total = 0.0;
    for _ in 0..window {
        total += w;
        w *= decay;
    }
    1.0 / total
}

/// Weighted circular mean of the newest `window` valid angles.
///
/// `history` is ordered newest first; `None` marks a step whose DOA was
/// invalid and is skipped. Returns `None` when no valid angle is available or
/// the weighted unit vectors cancel.
pub fn smooth_doa(history: &[Option<f64>], config: &SmoothingConfig) -> Option<f64> {
    weighted_circular_mean(history.iter().flatten().copied(), config)
}

fn weighted_circular_mean(newest_first: impl Iterator<Item = f64>, config: &SmoothingConfig) -> Option<f64> {
    let mut weight = 1.0;
    let (mut c, mut s, mut total) = (0.0, 0.0, 0.0);
    for angle in newest_first.take(config.window) {
        c += weight * angle.cos();
        s += weight * angle.sin();
        total += weight;
        weight *= config.decay;
    }
    if total == 0.0 {
        return None;
    }
    // renormalise over the available count during warm-up
    let (c, s) = (c / total, s / total);
    if c.hypot(s) < 1e-12 {
        return None;
    }
    Some(wrap_angle(s.atan2(c)))
}

/// Per-track smoothing state: turns a snapshot stream into DOA estimates.
#[derive(Debug, Clone)]
pub struct DoaSmoother {
    config: SmoothingConfig,
    recent: VecDeque<f64>,
}

impl DoaSmoother {
    pub fn new(config: SmoothingConfig) -> Self {
        Self { config, recent: VecDeque::with_capacity(config.window) }
    }

    pub fn config(&self) -> &SmoothingConfig {
        &self.config
    }

    pub fn reset(&mut self) {
        self.recent.clear();
    }

    /// Computes the raw DOA of `snapshot` and folds it into the smoothed
    /// estimate. Invalid raw angles do not enter the history.
    pub fn push(&mut self, layout: &AnchorLayout, snapshot: &RssiSnapshot) -> Result<DoaEstimate> {
        let gradient = rss_gradient(layout, snapshot)?;
        let (raw, valid) = doa_from_gradient(gradient);
        if valid {
            if self.recent.len() == self.config.window {
                self.recent.pop_back();
            }
            self.recent.push_front(raw);
        }
        match weighted_circular_mean(self.recent.iter().copied(), &self.config) {
            Some(smoothed) if valid => {
                Ok(DoaEstimate { raw_angle_rad: raw, smoothed_angle_rad: smoothed, gradient, valid: true })
            }
            Some(smoothed) => {
                // current sample unusable, but history still carries a direction
                Ok(DoaEstimate { raw_angle_rad: smoothed, smoothed_angle_rad: smoothed, gradient, valid: true })
            }
            None => Ok(DoaEstimate::invalid(gradient)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn square(side: f64) -> AnchorLayout {
        AnchorLayout::four_corner_rect(Rect::from_size(side, side).unwrap())
    }

    fn snap(v: &[f64]) -> RssiSnapshot {
        RssiSnapshot::new(0, v.to_vec(), None)
    }

    #[test]
    fn symmetric_field_has_zero_gradient() {
        let g = rss_gradient(&square(6.0), &snap(&[-50.0; 4])).unwrap();
        assert_eq!(g, Point2::ZERO);
        assert!(!doa_from_gradient(g).1);
    }

    #[test]
    fn hand_evaluated_four_corner_gradient() {
        // (−48 − (−52))/12 + (−48 − (−52))/12 = 2/3; y differences cancel
        let g = rss_gradient(&square(6.0), &snap(&[-52.0, -52.0, -48.0, -48.0])).unwrap();
        assert_relative_eq!(g.x, 2.0 / 3.0, epsilon = 1e-15);
        assert_eq!(g.y, 0.0);
    }

    #[test]
    fn plane_fit_recovers_plane() {
        let anchors = vec![
            Anchor::new("a", Point2::new(0.0, 0.0)),
            Anchor::new("b", Point2::new(4.0, 0.0)),
            Anchor::new("c", Point2::new(2.0, 3.4641)),
        ];
        let layout = AnchorLayout::general(anchors).unwrap();
        let (a, b, c) = (-1.5, 0.75, -55.0);
        let rssi: Vec<f64> = layout.positions().map(|p| a * p.x + b * p.y + c).collect();
        let g = rss_gradient(&layout, &snap(&rssi)).unwrap();
        assert_relative_eq!(g.x, a, epsilon = 1e-12);
        assert_relative_eq!(g.y, b, epsilon = 1e-12);
    }

    #[test]
    fn plane_fit_matches_central_difference_on_rectangle() {
        let four = square(6.0);
        let general = AnchorLayout::general(four.anchors().to_vec()).unwrap();
        let s = snap(&[-61.0, -57.5, -49.2, -55.1]);
        let g4 = rss_gradient(&four, &s).unwrap();
        let gg = rss_gradient(&general, &s).unwrap();
        assert_relative_eq!(g4.x, gg.x, epsilon = 1e-12);
        assert_relative_eq!(g4.y, gg.y, epsilon = 1e-12);
    }

    #[test]
    fn layout_errors() {
        let collinear = vec![
            Anchor::new("a", Point2::new(0.0, 0.0)),
            Anchor::new("b", Point2::new(1.0, 1.0)),
            Anchor::new("c", Point2::new(3.0, 3.0)),
        ];
        assert!(matches!(AnchorLayout::general(collinear), Err(Error::CollinearAnchors)));
        let two = vec![Anchor::new("a", Point2::ZERO), Anchor::new("b", Point2::new(1.0, 0.0))];
        assert!(AnchorLayout::general(two).is_err());
        let mut corners = square(6.0).anchors().to_vec();
        corners.swap(1, 3);
        assert!(AnchorLayout::four_corner(corners).is_err());
        let err = rss_gradient(&square(6.0), &snap(&[-50.0; 3])).unwrap_err();
        assert!(matches!(err, Error::AnchorCountMismatch { expected: 4, got: 3 }));
        assert!(rss_gradient(&square(6.0), &snap(&[-50.0, f64::NAN, -50.0, -50.0])).is_err());
    }

    #[test]
    fn quadrant_table() {
        assert_eq!(doa_from_gradient(Point2::new(1.0, 0.0)), (0.0, true));
        assert_relative_eq!(doa_from_gradient(Point2::new(0.0, 1.0)).0, FRAC_PI_2);
        assert_relative_eq!(doa_from_gradient(Point2::new(-1.0, -1.0)).0, -3.0 * PI / 4.0);
        assert_relative_eq!(doa_from_gradient(Point2::new(-1.0, 1.0)).0, 3.0 * PI / 4.0);
        assert_eq!(doa_from_gradient(Point2::new(-1.0, -0.0)).0, PI);
        assert!(!doa_from_gradient(Point2::new(1e-10, 0.0)).1);
    }

    #[test]
    fn smoothing_examples() {
        let cfg = SmoothingConfig::new(3, 0.99).unwrap();
        assert_relative_eq!(smooth_doa(&[Some(1.2); 3], &cfg).unwrap(), 1.2, epsilon = 1e-12);
        let one = SmoothingConfig::new(1, 0.99).unwrap();
        assert_eq!(smooth_doa(&[Some(0.3), Some(2.0)], &one), Some(0.3));
        // atan2(0.99·sin(π/2) + sin 0, 0.99·cos(π/2) + cos 0), evaluated independently
        let two = SmoothingConfig::new(2, 0.99).unwrap();
        assert_relative_eq!(
            smooth_doa(&[Some(0.0), Some(FRAC_PI_2)], &two).unwrap(),
            0.7803730800666359,
            epsilon = 1e-12
        );
        assert_eq!(smooth_doa(&[None, None], &two), None);
        assert_eq!(smooth_doa(&[None, Some(0.4)], &one), Some(0.4));
    }

    #[test]
    fn smoothing_across_the_seam() {
        let cfg = SmoothingConfig::new(2, 1.0).unwrap();
        let m = smooth_doa(&[Some(PI - 0.1), Some(-PI + 0.1)], &cfg).unwrap();
        assert_relative_eq!(m, PI, epsilon = 1e-12);
    }

    #[test]
    fn normalizer_tracks_parameters() {
        let mut cfg = SmoothingConfig::new(1, 0.99).unwrap();
        assert_eq!(cfg.normalizer(), 1.0);
        cfg.set_window(2).unwrap();
        assert_relative_eq!(cfg.normalizer(), 1.0 / 1.99);
        cfg.set_decay(0.5).unwrap();
        assert_relative_eq!(cfg.normalizer(), 1.0 / 1.5);
        assert!(SmoothingConfig::new(0, 0.99).is_err());
        assert!(SmoothingConfig::new(3, 0.0).is_err());
        assert!(SmoothingConfig::new(3, 1.01).is_err());
    }

    #[test]
    fn smoother_skips_invalid_samples() {
        let layout = square(6.0);
        let mut sm = DoaSmoother::new(SmoothingConfig::new(4, 0.99).unwrap());
        assert!(!sm.push(&layout, &snap(&[-50.0; 4])).unwrap().valid);
        let e = sm.push(&layout, &snap(&[-52.0, -52.0, -48.0, -48.0])).unwrap();
        assert!(e.valid);
        assert_eq!(e.smoothed_angle_rad, 0.0);
        let e = sm.push(&layout, &snap(&[-50.0; 4])).unwrap();
        assert!(e.valid);
        assert_eq!(e.smoothed_angle_rad, 0.0);
    }

    proptest! {
        #[test]
        fn exact_recovery_on_linear_field(a in -5.0f64..5.0, b in -5.0f64..5.0, c in -90.0f64..-20.0,
                                          w in 0.5f64..20.0, h in 0.5f64..20.0) {
            let layout = AnchorLayout::four_corner_rect(Rect::from_size(w, h).unwrap());
            let rssi: Vec<f64> = layout.positions().map(|p| a * p.x + b * p.y + c).collect();
            let g = rss_gradient(&layout, &snap(&rssi)).unwrap();
            let scale = a.abs().max(b.abs()).max(1e-3);
            prop_assert!((g.x - a).abs() <= 1e-12 * scale * (1.0 + c.abs() / w));
            prop_assert!((g.y - b).abs() <= 1e-12 * scale * (1.0 + c.abs() / h));
        }

        #[test]
        fn gradient_linear_and_offset_free(s in proptest::collection::vec(-90.0f64..-30.0, 4),
                                           t in proptest::collection::vec(-90.0f64..-30.0, 4),
                                           k in -3.0f64..3.0, offset in -20.0f64..20.0) {
            let layout = square(6.0);
            let g_s = rss_gradient(&layout, &snap(&s)).unwrap();
            let g_t = rss_gradient(&layout, &snap(&t)).unwrap();
            let combo: Vec<f64> = s.iter().zip(&t).map(|(x, y)| x + k * y).collect();
            let g_c = rss_gradient(&layout, &snap(&combo)).unwrap();
            prop_assert!((g_c.x - (g_s.x + k * g_t.x)).abs() < 1e-9);
            prop_assert!((g_c.y - (g_s.y + k * g_t.y)).abs() < 1e-9);
            let shifted: Vec<f64> = s.iter().map(|v| v + offset).collect();
            let g_o = rss_gradient(&layout, &snap(&shifted)).unwrap();
            prop_assert!((g_o.x - g_s.x).abs() < 1e-9 && (g_o.y - g_s.y).abs() < 1e-9);
        }

        #[test]
        fn angle_in_range(x in -1e3f64..1e3, y in -1e3f64..1e3) {
            let (a, valid) = doa_from_gradient(Point2::new(x, y));
            if valid {
                prop_assert!(a > -PI && a <= PI);
            }
        }

        #[test]
        fn rotation_equivariance(phi in -PI..PI, a in 0.1f64..3.0, b in -3.0f64..3.0) {
            let base = [Point2::new(0.0, 0.0), Point2::new(4.0, 0.0), Point2::new(2.0, 3.4641), Point2::new(1.0, 5.0)];
            let field = Point2::new(a, b);
            let doa = |pts: &[Point2], f: Point2| {
                let layout = AnchorLayout::general(
                    pts.iter().enumerate().map(|(i, p)| Anchor::new(i.to_string(), *p)).collect()).unwrap();
                let rssi: Vec<f64> = pts.iter().map(|p| f.dot(*p) - 60.0).collect();
                doa_from_gradient(rss_gradient(&layout, &snap(&rssi)).unwrap()).0
            };
            let rotated: Vec<Point2> = base.iter().map(|p| p.rotated(phi)).collect();
            let d0 = doa(&base, field);
            let d1 = doa(&rotated, field.rotated(phi));
            prop_assert!(wrap_angle(d1 - d0 - phi).abs() < 1e-9);
        }

        #[test]
        fn smoothing_constant_history(theta in -PI..PI, len in 1usize..40, window in 1usize..20) {
            let cfg = SmoothingConfig::new(window, 0.99).unwrap();
            let hist = vec![Some(theta); len];
            let m = smooth_doa(&hist, &cfg).unwrap();
            prop_assert!(wrap_angle(m - theta).abs() < 1e-12);
        }
    }
}
