use crate::{Error, Point2, Result};

/// Weighted centroid of the anchors, weighting each by its received power on
/// the linear scale (`10^(rssi/10)`), normalized to sum 1.
pub fn weighted_centroid(anchors: &[Point2], rssi: &[f64]) -> Result<Point2> {
    if anchors.is_empty() {
        return Err(Error::Empty("anchors"));
    }
    if anchors.len() != rssi.len() {
        return Err(Error::AnchorCountMismatch { expected: anchors.len(), got: rssi.len() });
    }
    if rssi.iter().any(|r| !r.is_finite()) {
        return Err(Error::NonFinite("rssi"));
    }
    // relative to the strongest reading so the largest weight is exactly 1
    let strongest = rssi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = rssi.iter().map(|r| 10f64.powf((r - strongest) / 10.0)).collect();
    let total: f64 = weights.iter().sum();
    Ok(anchors.iter().zip(&weights).fold(Point2::ZERO, |acc, (a, w)| acc + *a * (w / total)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn equal_readings_give_geometric_centroid() {
        let a = [Point2::new(0.0, 0.0), Point2::new(0.0, 6.0), Point2::new(6.0, 6.0), Point2::new(6.0, 0.0)];
        let p = weighted_centroid(&a, &[-55.0; 4]).unwrap();
        assert_relative_eq!(p.x, 3.0, epsilon = 1e-12);
        assert_relative_eq!(p.y, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn single_anchor() {
        let p = weighted_centroid(&[Point2::new(2.0, -1.0)], &[-70.0]).unwrap();
        assert_eq!(p, Point2::new(2.0, -1.0));
    }

    #[test]
    fn three_to_one_power_ratio() {
        // linear weights 0.75 and 0.25: a 3:1 power ratio is 10·log10(3) dB
        let r = 10.0 * 3f64.log10();
        let p = weighted_centroid(&[Point2::new(0.0, 0.0), Point2::new(4.0, 0.0)], &[-50.0 + r, -50.0]).unwrap();
        assert_relative_eq!(p.x, 1.0, epsilon = 1e-12);
        assert_eq!(p.y, 0.0);
    }

    #[test]
    fn errors() {
        assert!(weighted_centroid(&[], &[]).is_err());
        assert!(weighted_centroid(&[Point2::ZERO], &[-50.0, -40.0]).is_err());
        assert!(weighted_centroid(&[Point2::ZERO], &[f64::NAN]).is_err());
    }

    proptest! {
        #[test]
        fn stays_in_anchor_box(rssi in proptest::collection::vec(-120.0f64..-10.0, 4)) {
            // the four-corner convex hull is the rectangle itself
            let a = [Point2::new(0.0, 0.0), Point2::new(0.0, 6.0), Point2::new(6.0, 6.0), Point2::new(6.0, 0.0)];
            let p = weighted_centroid(&a, &rssi).unwrap();
            prop_assert!((-1e-12..=6.0 + 1e-12).contains(&p.x) && (-1e-12..=6.0 + 1e-12).contains(&p.y));
        }

        #[test]
        fn in_triangle_hull(rssi in proptest::collection::vec(-120.0f64..-10.0, 3)) {
            let a = [Point2::new(0.0, 0.0), Point2::new(4.0, 0.0), Point2::new(2.0, 3.0)];
            let p = weighted_centroid(&a, &rssi).unwrap();
            // barycentric coordinates must all be non-negative
            let cross = |o: Point2, u: Point2, v: Point2| (u.x - o.x) * (v.y - o.y) - (u.y - o.y) * (v.x - o.x);
            let eps = 1e-9;
            prop_assert!(cross(a[0], a[1], p) >= -eps);
            prop_assert!(cross(a[1], a[2], p) >= -eps);
            prop_assert!(cross(a[2], a[0], p) >= -eps);
        }
    }
}
