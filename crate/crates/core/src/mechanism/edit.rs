use super::{mobility, KinJoint, Mechanism, RigidLink, Scene, SceneWarning, TrackedPoint};
use crate::error::{Error, Result};
use crate::geom::{Point2, Pose};
use crate::recognition::draft_components;
use crate::recognition::LinkHypothesis;
use crate::Id;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Which link of a joint follows the dragged anchor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JointSide {
    A,
    B,
}

/// Move one link's anchor of `joint` so it sits at `new_world` under the
/// current `poses`. Only the chosen link changes; its inter-anchor
/// distances change accordingly. The returned mechanism rests at `poses`,
/// which generally no longer satisfy the moved joint, so it must be
/// re-assembled (see [`crate::kinematics::settle`]) before simulating.
pub fn move_joint(
    mech: &Mechanism,
    poses: &BTreeMap<Id, Pose>,
    joint: Id,
    new_world: Point2,
    side: JointSide,
) -> Result<Mechanism> {
    let j = mech.joint(joint).ok_or(Error::unknown("joint", joint))?;
    if !new_world.is_finite() {
        return Err(Error::InvalidParameter(
            "joint position must be finite".into(),
        ));
    }
    let link = match side {
        JointSide::A => j.a,
        JointSide::B => j.b,
    };
    let pose = poses
        .get(&link)
        .copied()
        .ok_or(Error::unknown("link", link))?;
    let local = pose.inverse_apply(new_world);

    let min_gap = 1e-9 * mech.scene_diagonal;
    let clash = mech
        .anchors_on(link)
        .into_iter()
        .filter(|(id, _)| *id != joint)
        .any(|(_, p)| p.distance(local) < min_gap);
    if clash {
        return Err(Error::DegenerateLink { link });
    }

    let mut out = mech.clone();
    for l in &mut out.links {
        if let Some(p) = poses.get(&l.id) {
            l.reference_pose = *p;
        }
    }
    let jm = out.joints.iter_mut().find(|x| x.id == joint).unwrap();
    match side {
        JointSide::A => jm.anchor_a = local,
        JointSide::B => jm.anchor_b = local,
    }
    Ok(out)
}

/// Register a point of interest on a link.
pub fn trace_point(mech: &Mechanism, link: Id, local: Point2) -> Result<Mechanism> {
    if mech.link(link).is_none() {
        return Err(Error::unknown("link", link));
    }
    if !local.is_finite() {
        return Err(Error::InvalidParameter(
            "tracked point must be finite".into(),
        ));
    }
    let mut out = mech.clone();
    out.tracked.push(TrackedPoint { link, local });
    Ok(out)
}

/// Re-attach a built scene to fresh link hypotheses after more sketching.
///
/// Each old link maps to the new hypothesis holding one of its strokes.
/// Links whose strokes are all gone disappear together with their joints;
/// links that merged keep the frame of the lowest old id and a joint between
/// them is dropped. Every drop is reported as a warning. New hypotheses
/// that match no old link become free single-link instances.
pub fn rebind_after_sketch(
    scene: &Scene,
    new_links: &[LinkHypothesis],
) -> (Scene, Vec<SceneWarning>) {
    let mut warnings = Vec::new();
    let owner_of = |strokes: &[Id]| -> Option<&LinkHypothesis> {
        new_links
            .iter()
            .find(|h| strokes.iter().any(|s| h.strokes.contains(s)))
    };

    // old link -> (new id, old reference pose)
    let mut map: BTreeMap<Id, Id> = BTreeMap::new();
    let mut old_pose: BTreeMap<Id, Pose> = BTreeMap::new();
    let mut diag: BTreeMap<Id, f64> = BTreeMap::new();
    for m in &scene.instances {
        for l in &m.links {
            old_pose.insert(l.id, l.reference_pose);
            match owner_of(&l.strokes) {
                Some(h) => {
                    map.insert(l.id, h.id);
                }
                None => warnings.push(SceneWarning {
                    code: "LinkRemoved".into(),
                    message: format!("link {} has no strokes left", l.id),
                }),
            }
        }
    }

    // frame keeper for each new link: lowest old id mapping to it
    let mut keeper: BTreeMap<Id, Id> = BTreeMap::new();
    for (&old, &new) in &map {
        keeper.entry(new).or_insert(old);
    }
    let to_new_local = |old: Id, p: Point2| -> Point2 {
        let new = map[&old];
        let keep = keeper[&new];
        old_pose[&keep].inverse_apply(old_pose[&old].apply(p))
    };

    let mut links: BTreeMap<Id, RigidLink> = BTreeMap::new();
    let mut joints: Vec<KinJoint> = Vec::new();
    let mut tracked: Vec<TrackedPoint> = Vec::new();
    for m in &scene.instances {
        for l in &m.links {
            let Some(&new) = map.get(&l.id) else { continue };
            let h = new_links.iter().find(|h| h.id == new).unwrap();
            let entry = links.entry(new).or_insert_with(|| RigidLink {
                id: new,
                reference_pose: old_pose[&keeper[&new]],
                strokes: h.strokes.clone(),
                is_ground: false,
            });
            entry.is_ground |= l.is_ground;
            diag.insert(new, m.scene_diagonal);
        }
        for j in &m.joints {
            match (map.get(&j.a), map.get(&j.b)) {
                (Some(&na), Some(&nb)) if na != nb => {
                    let mut nj = j.clone();
                    nj.anchor_a = to_new_local(j.a, j.anchor_a);
                    nj.anchor_b = to_new_local(j.b, j.anchor_b);
                    if let Some(axis) = j.axis_b {
                        let rot = old_pose[&j.b].theta - old_pose[&keeper[&nb]].theta;
                        nj.axis_b = Some(axis.rotated(rot));
                    }
                    nj.a = na;
                    nj.b = nb;
                    joints.push(nj);
                }
                (Some(_), Some(_)) => warnings.push(SceneWarning {
                    code: "JointDropped".into(),
                    message: format!("joint {} now connects a link to itself", j.id),
                }),
                _ => warnings.push(SceneWarning {
                    code: "JointDropped".into(),
                    message: format!("joint {} lost one of its links", j.id),
                }),
            }
        }
        for t in &m.tracked {
            if map.contains_key(&t.link) {
                tracked.push(TrackedPoint {
                    link: map[&t.link],
                    local: to_new_local(t.link, t.local),
                });
            }
        }
    }
    let fallback_diag = scene
        .instances
        .first()
        .map(|m| m.scene_diagonal)
        .unwrap_or(1.0);
    for h in new_links {
        links.entry(h.id).or_insert_with(|| RigidLink {
            id: h.id,
            reference_pose: Pose::IDENTITY,
            strokes: h.strokes.clone(),
            is_ground: false,
        });
    }

    // merged links may now hold two ground marks across former instances;
    // keep the lowest ground per new instance
    let ids: Vec<Id> = links.keys().copied().collect();
    let mut instances = Vec::new();
    for members in draft_components(&ids, joints.iter().map(|j| (j.a, j.b))) {
        let mut ground_seen = false;
        let mut ls: Vec<RigidLink> = members.iter().map(|id| links[id].clone()).collect();
        for l in &mut ls {
            if l.is_ground && ground_seen {
                l.is_ground = false;
                warnings.push(SceneWarning {
                    code: "GroundCleared".into(),
                    message: format!(
                        "link {} is no longer ground (one ground per instance)",
                        l.id
                    ),
                });
            }
            ground_seen |= l.is_ground;
        }
        let ground = ls.iter().find(|l| l.is_ground).map(|l| l.id);
        let js: Vec<KinJoint> = joints
            .iter()
            .filter(|j| members.contains(&j.a))
            .cloned()
            .map(|mut j| {
                if Some(j.b) == ground {
                    // keep the ground-on-a convention; b-frame data moves with it
                    std::mem::swap(&mut j.a, &mut j.b);
                    std::mem::swap(&mut j.anchor_a, &mut j.anchor_b);
                    if let Some(axis) = j.axis_b {
                        let pa = links[&j.a].reference_pose.theta;
                        let pb = links[&j.b].reference_pose.theta;
                        j.axis_b = Some(axis.rotated(pa - pb));
                    }
                }
                j
            })
            .collect();
        let mut mech = Mechanism {
            id: members[0],
            links: ls,
            joints: js,
            tracked: tracked
                .iter()
                .filter(|t| members.contains(&t.link))
                .copied()
                .collect(),
            scene_diagonal: members
                .iter()
                .find_map(|id| diag.get(id).copied())
                .unwrap_or(fallback_diag),
            mobility: 0,
        };
        mech.mobility = mobility(&mech);
        instances.push(mech);
    }
    let out = Scene {
        instances,
        warnings: scene.warnings.clone(),
    };
    (out, warnings)
}
