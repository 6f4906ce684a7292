//! The sketch document: strokes, image underlays, link decorations, edit
//! history and persistence.

mod document;
mod format;

pub use document::{DocumentContent, SketchDocument};
pub use format::{load, save, FORMAT_VERSION};

use crate::error::{Error, Result};
use crate::geom::{self, Point2};
use crate::Id;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrokeMode {
    Ink,
    Gesture,
}

/// A timestamped planar polyline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStroke")]
pub struct Stroke {
    pub id: Id,
    pub mode: StrokeMode,
    pub points: Vec<Point2>,
    /// Milliseconds, one per point, non-decreasing.
    pub t: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStroke {
    id: Id,
    mode: StrokeMode,
    points: Vec<Point2>,
    t: Vec<f64>,
}

impl TryFrom<RawStroke> for Stroke {
    type Error = Error;

    fn try_from(raw: RawStroke) -> Result<Stroke> {
        Stroke::new(raw.id, raw.mode, raw.points, raw.t)
    }
}

impl Stroke {
    /// Validates the raw samples and builds a stroke.
    pub fn new(id: Id, mode: StrokeMode, points: Vec<Point2>, t: Vec<f64>) -> Result<Stroke> {
        if points.len() < 2 {
            return Err(Error::RejectedStroke(format!(
                "needs at least 2 points, got {}",
                points.len()
            )));
        }
        if points.len() != t.len() {
            return Err(Error::RejectedStroke(format!(
                "{} points but {} timestamps",
                points.len(),
                t.len()
            )));
        }
        if points.iter().any(|p| !p.is_finite()) || t.iter().any(|v| !v.is_finite()) {
            return Err(Error::RejectedStroke("non-finite sample".into()));
        }
        if t.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::RejectedStroke("timestamps decrease".into()));
        }
        let length = geom::path_length(&points);
        if length.is_nan() || length <= 0.0 {
            return Err(Error::RejectedStroke("zero path length".into()));
        }
        Ok(Stroke {
            id,
            mode,
            points,
            t,
        })
    }

    pub fn path_length(&self) -> f64 {
        geom::path_length(&self.points)
    }

    pub fn is_ink(&self) -> bool {
        self.mode == StrokeMode::Ink
    }
}

/// Resample a stroke into `n` points equally spaced along its arc length.
pub fn resample_stroke(stroke: &Stroke, n: usize) -> Result<Vec<Point2>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "resample count must be >= 2, got {n}"
        )));
    }
    geom::resample(&stroke.points, n)
        .ok_or_else(|| Error::InvalidParameter("stroke has zero length".into()))
}

/// Display-only smoothing (moving average over `window` samples each side).
/// Recognition and simulation never see these points.
pub fn smoothed_for_display(stroke: &Stroke, window: usize) -> Vec<Point2> {
    let n = stroke.points.len();
    if window == 0 || n < 3 {
        return stroke.points.clone();
    }
    (0..n)
        .map(|i| {
            if i == 0 || i == n - 1 {
                return stroke.points[i];
            }
            let lo = i.saturating_sub(window);
            let hi = (i + window).min(n - 1);
            geom::centroid(&stroke.points[lo..=hi]).unwrap()
        })
        .collect()
}

/// A reference image drawn beneath all strokes. The image itself is opaque
/// to the engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImageUnderlay {
    pub id: Id,
    /// File path or blob id.
    pub image: String,
    pub position: Point2,
    pub scale: f64,
    pub rotation: f64,
}

/// Strokes riding on a link, in the host link's local frame. Ignored by
/// recognition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Decoration {
    pub id: Id,
    pub host: Id,
    pub strokes: Vec<Stroke>,
}
