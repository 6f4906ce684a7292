//! Kinematic model built from recognized hypotheses.
//!
//! Every link carries a local frame that coincides with the world frame at
//! build time, so stroke coordinates double as local coordinates and joint
//! anchors start out as the recognized world anchors. A link's "length" is
//! never stored; it is the distance between its joint anchors.

mod build;
mod edit;

pub use build::{build_mechanisms, classify_four_bar, mobility, FourBarClass, FourBarLengths};
pub use edit::{move_joint, rebind_after_sketch, trace_point, JointSide};

use crate::geom::{Point2, Pose};
use crate::recognition::{BuildDraft, JointKind, Recognition};
use crate::Id;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RigidLink {
    pub id: Id,
    /// Placement of the local frame at rest. Identity at build; re-seated
    /// when an edit forces the mechanism to re-assemble.
    pub reference_pose: Pose,
    pub strokes: Vec<Id>,
    pub is_ground: bool,
}

/// Prescribed motion of an input joint: the joint coordinate changes at
/// `rate` (rad/s for revolute, units/s for prismatic). Positive is
/// counter-clockwise, or along the positive slide axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Driver {
    pub joint: Id,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KinJoint {
    pub id: Id,
    pub kind: JointKind,
    /// When one side is ground it is `a`.
    pub a: Id,
    pub b: Id,
    pub anchor_a: Point2,
    pub anchor_b: Point2,
    /// Unit slide axis in b's local frame (prismatic only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis_b: Option<Point2>,
    pub is_input: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub driver: Option<Driver>,
}

impl KinJoint {
    pub fn anchor_on(&self, link: Id) -> Option<Point2> {
        if link == self.a {
            Some(self.anchor_a)
        } else if link == self.b {
            Some(self.anchor_b)
        } else {
            None
        }
    }

    pub fn other(&self, link: Id) -> Option<Id> {
        if link == self.a {
            Some(self.b)
        } else if link == self.b {
            Some(self.a)
        } else {
            None
        }
    }
}

/// A point of interest riding on a link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackedPoint {
    pub link: Id,
    pub local: Point2,
}

/// One connected linkage in the scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mechanism {
    /// Lowest link id in the instance.
    pub id: Id,
    /// Sorted by id.
    pub links: Vec<RigidLink>,
    pub joints: Vec<KinJoint>,
    pub tracked: Vec<TrackedPoint>,
    /// Scale used for tolerances (diagonal of the sketch bounds at build).
    pub scene_diagonal: f64,
    pub mobility: i64,
}

impl Mechanism {
    pub fn link(&self, id: Id) -> Option<&RigidLink> {
        self.links.iter().find(|l| l.id == id)
    }

    pub fn joint(&self, id: Id) -> Option<&KinJoint> {
        self.joints.iter().find(|j| j.id == id)
    }

    pub fn ground(&self) -> Option<Id> {
        self.links.iter().find(|l| l.is_ground).map(|l| l.id)
    }

    pub fn drivers(&self) -> impl Iterator<Item = &Driver> {
        self.joints.iter().filter_map(|j| j.driver.as_ref())
    }

    pub fn driver_count(&self) -> usize {
        self.drivers().count()
    }

    /// Anchors on `link` from every joint touching it, with the joint id.
    pub fn anchors_on(&self, link: Id) -> Vec<(Id, Point2)> {
        self.joints
            .iter()
            .filter_map(|j| j.anchor_on(link).map(|p| (j.id, p)))
            .collect()
    }

    /// World position of a joint's `a`-side and `b`-side anchors at the
    /// reference poses.
    pub fn reference_world_anchors(&self, joint: &KinJoint) -> (Point2, Point2) {
        let pa = self
            .link(joint.a)
            .map(|l| l.reference_pose)
            .unwrap_or_default();
        let pb = self
            .link(joint.b)
            .map(|l| l.reference_pose)
            .unwrap_or_default();
        (pa.apply(joint.anchor_a), pb.apply(joint.anchor_b))
    }

    pub fn reference_poses(&self) -> Vec<(Id, Pose)> {
        self.links
            .iter()
            .map(|l| (l.id, l.reference_pose))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneWarning {
    pub code: String,
    pub message: String,
}

impl SceneWarning {
    pub fn new(e: &crate::Error) -> Self {
        Self {
            code: e.code().to_string(),
            message: e.to_string(),
        }
    }
}

/// All mechanism instances in one sketch.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    pub instances: Vec<Mechanism>,
    #[serde(default)]
    pub warnings: Vec<SceneWarning>,
}

impl Scene {
    pub fn instance(&self, id: Id) -> Option<&Mechanism> {
        self.instances.iter().find(|m| m.id == id)
    }

    pub fn instance_of_link(&self, link: Id) -> Option<&Mechanism> {
        self.instances.iter().find(|m| m.link(link).is_some())
    }

    pub fn instance_of_joint(&self, joint: Id) -> Option<&Mechanism> {
        self.instances.iter().find(|m| m.joint(joint).is_some())
    }
}

/// Build-tab state persisted in the document's `mechanism` field.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanismState {
    pub draft: BuildDraft,
    pub scene: Option<Scene>,
}

impl MechanismState {
    pub fn from_recognition(rec: &Recognition) -> Self {
        Self {
            draft: BuildDraft::from_recognition(rec),
            scene: None,
        }
    }

    pub fn has_link(&self, id: Id) -> bool {
        self.draft.link(id).is_some()
            || self
                .scene
                .as_ref()
                .is_some_and(|s| s.instance_of_link(id).is_some())
    }
}
