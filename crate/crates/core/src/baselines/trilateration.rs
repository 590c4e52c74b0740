use crate::{Error, Point2, Result};

const MAX_ITERATIONS: usize = 100;
const STEP_TOLERANCE_M: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrilaterationResult {
    pub position: Point2,
    /// False when the iteration cap was hit before the step fell below
    /// tolerance; `position` is then the best iterate.
    pub converged: bool,
    pub iterations: usize,
    pub objective: f64,
}

/// `Σ_i (‖p − a_i‖ − d_i)²`.
pub fn trilateration_objective(anchors: &[Point2], distances: &[f64], p: Point2) -> f64 {
    anchors.iter().zip(distances).map(|(a, d)| (p.distance(*a) - d).powi(2)).sum()
}

/// Least-squares position from anchor ranges by damped Gauss–Newton, starting
/// at the anchor centroid. Each step is halved until the objective does not
/// increase.
pub fn trilaterate(anchors: &[Point2], distances: &[f64]) -> Result<TrilaterationResult> {
    if anchors.len() < 3 {
        return Err(Error::InvalidLayout(format!("trilateration needs at least 3 anchors, got {}", anchors.len())));
    }
    if anchors.len() != distances.len() {
        return Err(Error::AnchorCountMismatch { expected: anchors.len(), got: distances.len() });
    }
    if distances.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
        return Err(Error::InvalidConfig("distances must be positive and finite".into()));
    }
    check_not_collinear(anchors)?;

    let objective = |p: Point2| trilateration_objective(anchors, distances, p);
    let mut p = anchors.iter().fold(Point2::ZERO, |acc, a| acc + *a) * (1.0 / anchors.len() as f64);
    let mut f = objective(p);
    for iteration in 1..=MAX_ITERATIONS {
        // normal equations JᵀJ δ = -Jᵀr with J_i = (p - a_i)/‖p - a_i‖
        let (mut h11, mut h12, mut h22, mut g1, mut g2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (a, d) in anchors.iter().zip(distances) {
            let diff = p - *a;
            let range = diff.norm();
            if range == 0.0 {
                continue;
            }
            let (jx, jy) = (diff.x / range, diff.y / range);
            let r = range - d;
            h11 += jx * jx;
            h12 += jx * jy;
            h22 += jy * jy;
            g1 += jx * r;
            g2 += jy * r;
        }
        let mu = 1e-12 * (h11 + h22).max(1e-300);
        let (h11, h22) = (h11 + mu, h22 + mu);
        let det = h11 * h22 - h12 * h12;
        if !(det.is_finite() && det > 0.0) {
            return Ok(TrilaterationResult { position: p, converged: false, iterations: iteration, objective: f });
        }
        let delta = Point2::new(-(h22 * g1 - h12 * g2) / det, -(h11 * g2 - h12 * g1) / det);

        let mut t = 1.0;
        let mut candidate = p + delta;
        let mut fc = objective(candidate);
        while fc > f && t > 1e-12 {
            t *= 0.5;
            candidate = p + delta * t;
            fc = objective(candidate);
        }
        if fc > f {
            // no descent along the Gauss–Newton direction: stationary point
            return Ok(TrilaterationResult { position: p, converged: true, iterations: iteration, objective: f });
        }
        let step = (delta * t).norm();
        p = candidate;
        f = fc;
        if step < STEP_TOLERANCE_M {
            return Ok(TrilaterationResult { position: p, converged: true, iterations: iteration, objective: f });
        }
    }
    Ok(TrilaterationResult { position: p, converged: false, iterations: MAX_ITERATIONS, objective: f })
}

fn check_not_collinear(anchors: &[Point2]) -> Result<()> {
    let a0 = anchors[0];
    let scale = anchors.iter().map(|a| a.distance(a0)).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::CollinearAnchors);
    }
    let far = anchors.iter().copied().max_by(|a, b| a.distance(a0).total_cmp(&b.distance(a0))).unwrap();
    let dir = (far - a0) * (1.0 / scale);
    let off_line = anchors.iter().any(|a| {
        let v = *a - a0;
        (dir.x * v.y - dir.y * v.x).abs() > 1e-9 * scale
    });
    if off_line {
        Ok(())
    } else {
        Err(Error::CollinearAnchors)
    }
}
