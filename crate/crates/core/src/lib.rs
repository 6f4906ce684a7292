//! Sketch-based planar mechanism workbench.
//!
//! Freehand ink strokes are grouped into rigid links, gesture strokes
//! (circles and lines) become revolute and prismatic joints, and the
//! resulting linkage is simulated with a position-level Newton solver that
//! traces coupler curves and detects locking.
//!
//! The layers, bottom up:
//!
//! - [`geom`]: points, poses, polyline distances, resampling
//! - [`sketch`]: the editable document, undo/redo and the `.mech.json` format
//! - [`recognition`]: link grouping, gesture classification, joint extraction
//! - [`mechanism`]: kinematic model, mobility, joint manipulation
//! - [`kinematics`]: constraint assembly, stepping, traces and exports
//! - [`session`]: command/event protocol and the WebSocket service
//! - [`cli`]: the headless `simulate` / `recognize` / `serve` front door

pub mod cli;
mod error;
pub mod fixtures;
pub mod geom;
pub mod kinematics;
pub mod mechanism;
pub mod recognition;
pub mod session;
pub mod sketch;

pub use error::{Error, Result};
pub use geom::{Point2, Pose};

use serde::{Deserialize, Serialize};
use std::fmt;

/// Identifier for strokes, underlays and decorations. Links take the id of
/// their lowest member stroke and joints the id of their gesture stroke, so
/// every entity in a scene is addressed from one id space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Id(pub u64);

/// Ids are numbers, but as JSON object keys they are written as strings,
/// and inside internally tagged messages serde hands those keys over
/// unconverted. Both spellings are accepted.
impl<'de> Deserialize<'de> for Id {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct IdVisitor;

        impl serde::de::Visitor<'_> for IdVisitor {
            type Value = Id;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a non-negative integer id")
            }

            fn visit_u64<E: serde::de::Error>(self, v: u64) -> std::result::Result<Id, E> {
                Ok(Id(v))
            }

            fn visit_i64<E: serde::de::Error>(self, v: i64) -> std::result::Result<Id, E> {
                u64::try_from(v)
                    .map(Id)
                    .map_err(|_| E::invalid_value(serde::de::Unexpected::Signed(v), &self))
            }

            fn visit_str<E: serde::de::Error>(self, v: &str) -> std::result::Result<Id, E> {
                v.parse()
                    .map(Id)
                    .map_err(|_| E::invalid_value(serde::de::Unexpected::Str(v), &self))
            }
        }

        d.deserialize_any(IdVisitor)
    }
}

impl fmt::Display for Id {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    #[derive(Debug, PartialEq, Serialize, Deserialize)]
    #[serde(tag = "type")]
    enum Tagged {
        Map { by_id: BTreeMap<Id, f64> },
    }

    #[test]
    fn id_keys_survive_tagged_enums() {
        let v = Tagged::Map {
            by_id: BTreeMap::from([(Id(5), 1.5), (Id(12), -2.0)]),
        };
        let text = serde_json::to_string(&v).unwrap();
        assert_eq!(text, r#"{"type":"Map","by_id":{"5":1.5,"12":-2.0}}"#);
        assert_eq!(serde_json::from_str::<Tagged>(&text).unwrap(), v);
    }

    #[test]
    fn id_rejects_non_integers() {
        assert_eq!(serde_json::from_str::<Id>("7").unwrap(), Id(7));
        assert!(serde_json::from_str::<Id>("-1").is_err());
        assert!(serde_json::from_str::<Id>("1.5").is_err());
        assert!(serde_json::from_str::<Id>(r#""x""#).is_err());
    }
}
