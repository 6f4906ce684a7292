//! Build-tab recognition: ink strokes become rigid links by proximity
//! grouping, gesture strokes become joints (circle: revolute, line:
//! prismatic).
//!
//! Recognition is a pure function of a document snapshot. It runs when the
//! user asks for it, never implicitly per stroke.

mod draft;
mod gesture;
mod grouping;

pub(crate) use draft::components as draft_components;
pub use draft::{BuildDraft, MarkerColor, MarkerEvent};
pub use gesture::{
    classify_gesture, classify_points, gesture_features, GestureClass, GestureFeatures,
    GestureThresholds,
};
pub use grouping::group_links;
pub(crate) use grouping::UnionFind;

use crate::error::{Error, Result};
use crate::geom::{self, Point2};
use crate::sketch::{DocumentContent, Stroke};
use crate::Id;
use serde::{Deserialize, Serialize};

/// Link colors as `#rrggbb`; a link's color index is its position in the
/// recognition output modulo 12.
pub const PALETTE: [&str; 12] = [
    "#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4", "#42d4f4", "#f032e6", "#9a6324",
    "#469990", "#800000", "#808000", "#000075",
];

/// Fraction of the scene diagonal used as the default grouping tolerance.
pub const DEFAULT_EPSILON_FRACTION: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RecognitionConfig {
    /// Absolute grouping tolerance; `None` means 2% of the scene diagonal.
    pub epsilon: Option<f64>,
    pub thresholds: GestureThresholds,
}

impl RecognitionConfig {
    pub fn epsilon_for(&self, content: &DocumentContent) -> f64 {
        self.epsilon
            .unwrap_or(DEFAULT_EPSILON_FRACTION * content.scene_diagonal())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkHypothesis {
    /// Equal to the lowest member stroke id.
    pub id: Id,
    /// Sorted member ink strokes.
    pub strokes: Vec<Id>,
    pub color: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JointKind {
    Revolute,
    Prismatic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointHypothesis {
    /// The source gesture stroke id.
    pub id: Id,
    pub kind: JointKind,
    pub a: Id,
    pub b: Id,
    pub anchor: Point2,
    /// Unit slide direction, prismatic only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Point2>,
}

/// A gesture that did not produce a joint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GestureWarning {
    pub gesture: Id,
    pub code: String,
    pub message: String,
}

impl GestureWarning {
    fn from_error(gesture: Id, e: &Error) -> Self {
        Self {
            gesture,
            code: e.code().to_string(),
            message: e.to_string(),
        }
    }
}

/// Output of a full recognition pass.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Recognition {
    pub epsilon: f64,
    pub links: Vec<LinkHypothesis>,
    pub joints: Vec<JointHypothesis>,
    pub warnings: Vec<GestureWarning>,
}

/// Turn a classified gesture into a joint between exactly two links.
///
/// A link takes part when any of its ink strokes passes within `eps` of the
/// gesture polyline. The anchor is the mean of the gesture's raw points for
/// both joint kinds; for a partial arc this is biased towards the arc.
pub fn extract_joint(
    gesture: &GestureClass,
    stroke: &Stroke,
    links: &[LinkHypothesis],
    content: &DocumentContent,
    eps: f64,
) -> Result<JointHypothesis> {
    let kind = match gesture {
        GestureClass::Circle { .. } => JointKind::Revolute,
        GestureClass::Line { .. } => JointKind::Prismatic,
        GestureClass::Unknown => return Err(Error::UnrecognizedGesture(stroke.id)),
    };
    let touched: Vec<Id> = links
        .iter()
        .filter(|link| {
            link.strokes
                .iter()
                .filter_map(|&s| content.stroke(s))
                .any(|ink| geom::polyline_distance(&ink.points, &stroke.points) <= eps)
        })
        .map(|l| l.id)
        .collect();
    if touched.len() != 2 {
        return Err(Error::AmbiguousJoint {
            gesture: stroke.id,
            count: touched.len(),
        });
    }
    let anchor = geom::centroid(&stroke.points).expect("strokes have >= 2 points");
    let direction = match *gesture {
        GestureClass::Line { direction, .. } => Some(direction),
        _ => None,
    };
    Ok(JointHypothesis {
        id: stroke.id,
        kind,
        a: touched[0],
        b: touched[1],
        anchor,
        direction,
    })
}

/// Group links and extract joints from every gesture stroke. Gestures that
/// do not yield a joint are reported as warnings.
pub fn recognize(content: &DocumentContent, config: &RecognitionConfig) -> Recognition {
    let eps = config.epsilon_for(content);
    let links = group_links(&content.strokes, eps);
    let mut joints = Vec::new();
    let mut warnings = Vec::new();
    for g in content.gesture_strokes() {
        let class = classify_gesture(g, &config.thresholds).expect("gesture stroke");
        match extract_joint(&class, g, &links, content, eps) {
            Ok(j) => joints.push(j),
            Err(e) => warnings.push(GestureWarning::from_error(g.id, &e)),
        }
    }
    Recognition {
        epsilon: eps,
        links,
        joints,
        warnings,
    }
}
