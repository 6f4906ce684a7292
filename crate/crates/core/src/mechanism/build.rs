use super::{Driver, KinJoint, Mechanism, RigidLink, Scene, SceneWarning};
use crate::error::Error;
use crate::geom::Pose;
use crate::recognition::{BuildDraft, JointKind};
use crate::Id;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Planar Grübler-Kutzbach count: 3(n - 1) - 2j, with n counting the ground
/// link and j the lower-pair joints.
pub fn mobility(mech: &Mechanism) -> i64 {
    grubler(mech.links.len(), mech.joints.len())
}

fn grubler(links: usize, joints: usize) -> i64 {
    3 * (links as i64 - 1) - 2 * joints as i64
}

/// Split the draft's link-joint graph into connected instances and turn each
/// into a [`Mechanism`] at its build pose.
///
/// Missing ground is not fatal: the instance is built and a `NoGround`
/// warning is attached to the scene.
pub fn build_mechanisms(draft: &BuildDraft, scene_diagonal: f64) -> Scene {
    let mut scene = Scene::default();
    for members in draft.instances() {
        let ground = draft.ground.iter().copied().find(|g| members.contains(g));
        let links: Vec<RigidLink> = members
            .iter()
            .map(|&id| RigidLink {
                id,
                reference_pose: Pose::IDENTITY,
                strokes: draft
                    .link(id)
                    .map(|l| l.strokes.clone())
                    .unwrap_or_default(),
                is_ground: Some(id) == ground,
            })
            .collect();
        let joints: Vec<KinJoint> = draft
            .joints
            .iter()
            .filter(|j| members.contains(&j.a))
            .map(|h| {
                let (a, b) = if Some(h.b) == ground {
                    (h.b, h.a)
                } else {
                    (h.a, h.b)
                };
                let driver = draft
                    .inputs
                    .get(&h.id)
                    .map(|&rate| Driver { joint: h.id, rate });
                KinJoint {
                    id: h.id,
                    kind: h.kind,
                    a,
                    b,
                    anchor_a: h.anchor,
                    anchor_b: h.anchor,
                    axis_b: match h.kind {
                        JointKind::Prismatic => h.direction,
                        JointKind::Revolute => None,
                    },
                    is_input: driver.is_some(),
                    driver,
                }
            })
            .collect();
        let mut mech = Mechanism {
            id: members[0],
            links,
            joints,
            tracked: Vec::new(),
            scene_diagonal,
            mobility: 0,
        };
        mech.mobility = mobility(&mech);
        if ground.is_none() {
            scene
                .warnings
                .push(SceneWarning::new(&Error::NoGround(mech.id)));
        }
        scene.instances.push(mech);
    }
    scene
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourBarLengths {
    pub ground: f64,
    pub input: f64,
    pub coupler: f64,
    pub output: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FourBarClass {
    /// Grashof, shortest link adjacent to ground: it fully rotates.
    CrankRocker,
    /// Grashof, shortest link is the ground.
    DoubleCrank,
    /// Grashof, shortest link is the coupler.
    DoubleRocker,
    /// s + l = p + q: passes through collinear change points.
    ChangePoint,
    /// s + l > p + q: no link fully rotates.
    TripleRocker,
}

impl FourBarClass {
    pub fn is_grashof(self) -> bool {
        matches!(
            self,
            Self::CrankRocker | Self::DoubleCrank | Self::DoubleRocker
        )
    }
}

impl fmt::Display for FourBarClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::CrankRocker => "Grashof crank-rocker",
            Self::DoubleCrank => "Grashof double-crank",
            Self::DoubleRocker => "Grashof double-rocker",
            Self::ChangePoint => "change-point (s + l = p + q)",
            Self::TripleRocker => "non-Grashof triple-rocker",
        })
    }
}

/// Recognize a grounded single-loop four-bar with revolute joints and
/// report its link lengths and Grashof class. The input link is the
/// ground-adjacent link carrying the driver (or the lower id).
pub fn classify_four_bar(mech: &Mechanism) -> Option<(FourBarLengths, FourBarClass)> {
    if mech.links.len() != 4 || mech.joints.len() != 4 {
        return None;
    }
    if mech.joints.iter().any(|j| j.kind != JointKind::Revolute) {
        return None;
    }
    let ground = mech.ground()?;
    let length_of = |link: Id| -> Option<f64> {
        let anchors = mech.anchors_on(link);
        (anchors.len() == 2).then(|| anchors[0].1.distance(anchors[1].1))
    };
    let grounded: Vec<&KinJoint> = mech
        .joints
        .iter()
        .filter(|j| j.a == ground || j.b == ground)
        .collect();
    if grounded.len() != 2 {
        return None;
    }
    let pick = grounded
        .iter()
        .find(|j| j.driver.is_some())
        .copied()
        .unwrap_or(grounded[0]);
    let input = pick.other(ground)?;
    let other_ground_joint = grounded.iter().find(|j| j.id != pick.id)?;
    let output = other_ground_joint.other(ground)?;
    let coupler = mech
        .links
        .iter()
        .map(|l| l.id)
        .find(|&id| id != ground && id != input && id != output)?;
    let lengths = FourBarLengths {
        ground: length_of(ground)?,
        input: length_of(input)?,
        coupler: length_of(coupler)?,
        output: length_of(output)?,
    };
    let mut sorted = [
        lengths.ground,
        lengths.input,
        lengths.coupler,
        lengths.output,
    ];
    sorted.sort_by(f64::total_cmp);
    let (s, p, q, l) = (sorted[0], sorted[1], sorted[2], sorted[3]);
    let tol = 1e-9 * l;
    let class = if (s + l - (p + q)).abs() <= tol {
        FourBarClass::ChangePoint
    } else if s + l > p + q {
        FourBarClass::TripleRocker
    } else if lengths.ground == s {
        FourBarClass::DoubleCrank
    } else if lengths.coupler == s {
        FourBarClass::DoubleRocker
    } else {
        FourBarClass::CrankRocker
    };
    Some((lengths, class))
}
