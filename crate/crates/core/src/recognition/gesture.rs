use crate::error::{Error, Result};
use crate::geom::{self, Point2};
use crate::sketch::{Stroke, StrokeMode};
use serde::{Deserialize, Serialize};

/// Classifier thresholds. All ratios are dimensionless so the classifier is
/// scale invariant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GestureThresholds {
    /// Max endpoint gap / path length for a circle.
    pub closure_ratio: f64,
    /// Max coefficient of variation of the radius about the centroid.
    pub radial_cv: f64,
    /// Max perpendicular deviation from the fitted line, as a fraction of
    /// the path length.
    pub line_deviation: f64,
}

impl Default for GestureThresholds {
    fn default() -> Self {
        Self {
            closure_ratio: 0.30,
            radial_cv: 0.25,
            line_deviation: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GestureClass {
    /// `center` is the plain average of the stroke coordinates.
    Circle {
        center: Point2,
        radius: f64,
    },
    /// Least-squares line through `point` with unit `direction`.
    Line {
        point: Point2,
        direction: Point2,
    },
    Unknown,
}

/// Circle/line measurements used by [`classify_gesture`]; exposed for
/// diagnostics and tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GestureFeatures {
    pub path_length: f64,
    pub closure_ratio: f64,
    pub centroid: Point2,
    pub mean_radius: f64,
    pub radial_cv: f64,
    pub line_point: Point2,
    pub line_direction: Point2,
    pub line_deviation_ratio: f64,
}

pub fn gesture_features(points: &[Point2]) -> Option<GestureFeatures> {
    let path_length = geom::path_length(points);
    if path_length.is_nan() || path_length <= 0.0 {
        return None;
    }
    let closure_ratio = points[0].distance(*points.last()?) / path_length;
    let centroid = geom::centroid(points)?;
    let radii: Vec<f64> = points.iter().map(|p| p.distance(centroid)).collect();
    let n = radii.len() as f64;
    let mean_radius = radii.iter().sum::<f64>() / n;
    let var = radii.iter().map(|r| (r - mean_radius).powi(2)).sum::<f64>() / n;
    let radial_cv = if mean_radius > 0.0 {
        var.sqrt() / mean_radius
    } else {
        f64::INFINITY
    };
    let (line_point, line_direction) = geom::fit_line(points)?;
    let normal = line_direction.perp();
    let max_dev = points
        .iter()
        .map(|p| (*p - line_point).dot(normal).abs())
        .fold(0.0, f64::max);
    Some(GestureFeatures {
        path_length,
        closure_ratio,
        centroid,
        mean_radius,
        radial_cv,
        line_point,
        line_direction,
        line_deviation_ratio: max_dev / path_length,
    })
}

/// Classify a gesture stroke. The circle test runs first.
pub fn classify_gesture(stroke: &Stroke, th: &GestureThresholds) -> Result<GestureClass> {
    if stroke.mode != StrokeMode::Gesture {
        return Err(Error::NotAGesture(stroke.id));
    }
    Ok(classify_points(&stroke.points, th))
}

pub fn classify_points(points: &[Point2], th: &GestureThresholds) -> GestureClass {
    let Some(f) = gesture_features(points) else {
        return GestureClass::Unknown;
    };
    if f.closure_ratio <= th.closure_ratio && f.radial_cv <= th.radial_cv && f.mean_radius > 0.0 {
        GestureClass::Circle {
            center: f.centroid,
            radius: f.mean_radius,
        }
    } else if f.line_deviation_ratio <= th.line_deviation {
        GestureClass::Line {
            point: f.line_point,
            direction: f.line_direction,
        }
    } else {
        GestureClass::Unknown
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Id;
    use std::f64::consts::PI;

    fn gesture(points: Vec<Point2>) -> Stroke {
        let t = (0..points.len()).map(|k| k as f64).collect();
        Stroke::new(Id(1), StrokeMode::Gesture, points, t).unwrap()
    }

    fn circle(c: Point2, r: f64, n: usize, sweep: f64) -> Vec<Point2> {
        (0..n)
            .map(|k| c + Point2::new(r, 0.0).rotated(sweep * k as f64 / n as f64))
            .collect()
    }

    #[test]
    fn uniform_circle() {
        let g = gesture(circle(Point2::new(5.0, 5.0), 2.0, 64, 2.0 * PI));
        match classify_gesture(&g, &GestureThresholds::default()).unwrap() {
            GestureClass::Circle { center, radius } => {
                assert!(center.distance(Point2::new(5.0, 5.0)) < 1e-9);
                assert!((radius - 2.0).abs() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn straight_segment() {
        let g = gesture((0..=12).map(|k| Point2::new(0.5 * k as f64, 0.0)).collect());
        match classify_gesture(&g, &GestureThresholds::default()).unwrap() {
            GestureClass::Line { direction, .. } => {
                assert!((direction.x - 1.0).abs() < 1e-12 && direction.y.abs() < 1e-12)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn semicircle_is_unknown() {
        // closed-form: endpoint gap 2r over arc length pi*r, well above 0.30;
        // deviation from the fitted line is a sizeable fraction of r
        let pts: Vec<_> = (0..=100)
            .map(|k| Point2::new(3.0, 0.0).rotated(PI * k as f64 / 100.0))
            .collect();
        let f = gesture_features(&pts).unwrap();
        assert!((f.closure_ratio - 2.0 / PI).abs() < 1e-3);
        assert!(f.line_deviation_ratio > 0.05);
        assert_eq!(
            classify_points(&pts, &GestureThresholds::default()),
            GestureClass::Unknown
        );
    }

    #[test]
    fn ink_is_rejected() {
        let mut g = gesture(circle(Point2::ORIGIN, 1.0, 16, 2.0 * PI));
        g.mode = StrokeMode::Ink;
        assert_eq!(
            classify_gesture(&g, &GestureThresholds::default())
                .unwrap_err()
                .code(),
            "NotAGesture"
        );
    }
}
