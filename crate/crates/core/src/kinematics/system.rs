use crate::error::{Error, Result};
use crate::geom::{Point2, Pose};
use crate::mechanism::{Mechanism, TrackedPoint};
use crate::recognition::JointKind;
use crate::Id;
use nalgebra::{DMatrix, DVector};
use std::collections::BTreeMap;

/// Position of a link's (x, y, theta) block in the unknown vector, or the
/// fixed ground pose.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Slot {
    Ground(Pose),
    Free(usize),
}

#[derive(Debug, Clone, PartialEq)]
struct JointEq {
    kind: JointKind,
    a: Slot,
    b: Slot,
    pa: Point2,
    pb: Point2,
    /// b-local slide axis (prismatic)
    axis: Point2,
    /// locked relative angle theta_b - theta_a (prismatic)
    angle: f64,
}

/// A driven joint coordinate: relative rotation theta_b - theta_a
/// (revolute) or displacement of b's anchor from a's along the slide axis
/// (prismatic).
#[derive(Debug, Clone, PartialEq)]
pub struct DriverEq {
    pub joint: Id,
    pub kind: JointKind,
    pub rate: f64,
    index: usize,
}

/// Planar constraint equations of one mechanism in absolute coordinates:
/// each non-ground link contributes (x, y, theta) unknowns, ordered by link
/// id. Revolute joints add two co-location rows, prismatic joints an angle
/// lock and an on-line row, and each driver one row prescribing its joint
/// coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem {
    pub instance: Id,
    /// Non-ground links in unknown order.
    pub free_links: Vec<Id>,
    pub ground: Id,
    ground_pose: Pose,
    slots: BTreeMap<Id, Slot>,
    joints: Vec<JointEq>,
    pub drivers: Vec<DriverEq>,
    pub tracked: Vec<TrackedPoint>,
    pub scene_diagonal: f64,
    pub mobility: i64,
}

impl ConstraintSystem {
    /// Assemble the square system for a grounded mechanism whose driver
    /// count equals its mobility.
    pub fn assemble(mech: &Mechanism) -> Result<ConstraintSystem> {
        let sys = Self::assemble_unchecked(mech)?;
        let d = sys.drivers.len();
        if sys.mobility <= 0 {
            return Err(Error::Structure(sys.mobility));
        }
        if (d as i64) < sys.mobility {
            return Err(Error::Underdriven {
                mobility: sys.mobility,
                drivers: d,
            });
        }
        if (d as i64) > sys.mobility {
            return Err(Error::Overdriven {
                mobility: sys.mobility,
                drivers: d,
            });
        }
        debug_assert_eq!(sys.equation_count(), sys.unknown_count());
        Ok(sys)
    }

    /// Assemble without the mobility/driver count check. Used for
    /// re-assembly after edits where the system may be non-square.
    pub fn assemble_unchecked(mech: &Mechanism) -> Result<ConstraintSystem> {
        let ground = mech.ground().ok_or(Error::NoGround(mech.id))?;
        Self::assemble_with_fixed(mech, ground)
    }

    fn assemble_with_fixed(mech: &Mechanism, ground: Id) -> Result<ConstraintSystem> {
        let ground_pose = mech
            .link(ground)
            .map(|l| l.reference_pose)
            .unwrap_or_default();
        let mut slots = BTreeMap::new();
        let mut free_links = Vec::new();
        for l in &mech.links {
            if l.id == ground {
                slots.insert(l.id, Slot::Ground(ground_pose));
            } else {
                slots.insert(l.id, Slot::Free(3 * free_links.len()));
                free_links.push(l.id);
            }
        }
        let mut joints = Vec::new();
        let mut drivers = Vec::new();
        for j in &mech.joints {
            let slot = |id: Id| slots.get(&id).copied().ok_or(Error::unknown("link", id));
            let (a, b) = (slot(j.a)?, slot(j.b)?);
            let angle = {
                let ta = mech
                    .link(j.a)
                    .map(|l| l.reference_pose.theta)
                    .unwrap_or(0.0);
                let tb = mech
                    .link(j.b)
                    .map(|l| l.reference_pose.theta)
                    .unwrap_or(0.0);
                tb - ta
            };
            let axis = match j.kind {
                JointKind::Prismatic => j.axis_b.and_then(|a| a.normalized()).ok_or_else(|| {
                    Error::InvalidParameter(format!("prismatic joint {} has no axis", j.id))
                })?,
                JointKind::Revolute => Point2::new(1.0, 0.0),
            };
            if let Some(d) = j.driver {
                drivers.push(DriverEq {
                    joint: j.id,
                    kind: j.kind,
                    rate: d.rate,
                    index: joints.len(),
                });
            }
            joints.push(JointEq {
                kind: j.kind,
                a,
                b,
                pa: j.anchor_a,
                pb: j.anchor_b,
                axis,
                angle,
            });
        }
        Ok(ConstraintSystem {
            instance: mech.id,
            free_links,
            ground,
            ground_pose,
            slots,
            joints,
            drivers,
            tracked: mech.tracked.clone(),
            scene_diagonal: mech.scene_diagonal,
            mobility: mech.mobility,
        })
    }

    pub fn unknown_count(&self) -> usize {
        3 * self.free_links.len()
    }

    pub fn equation_count(&self) -> usize {
        2 * self.joints.len() + self.drivers.len()
    }

    /// Residual tolerance: 1e-9 of the scene diagonal.
    pub fn tolerance(&self) -> f64 {
        1e-9 * self.scene_diagonal
    }

    /// Generalized coordinates of the reference poses.
    pub fn reference_q(&self, mech: &Mechanism) -> DVector<f64> {
        let mut q = DVector::zeros(self.unknown_count());
        for (k, id) in self.free_links.iter().enumerate() {
            let p = mech.link(*id).map(|l| l.reference_pose).unwrap_or_default();
            q[3 * k] = p.x;
            q[3 * k + 1] = p.y;
            q[3 * k + 2] = p.theta;
        }
        q
    }

    fn pose_of(slot: Slot, q: &DVector<f64>) -> Pose {
        match slot {
            Slot::Ground(p) => p,
            Slot::Free(i) => Pose::new(q[i], q[i + 1], q[i + 2]),
        }
    }

    pub fn link_pose(&self, link: Id, q: &DVector<f64>) -> Option<Pose> {
        self.slots.get(&link).map(|&s| Self::pose_of(s, q))
    }

    pub fn poses(&self, q: &DVector<f64>) -> BTreeMap<Id, Pose> {
        self.slots
            .iter()
            .map(|(&id, &s)| (id, Self::pose_of(s, q)))
            .collect()
    }

    pub fn world_point(&self, link: Id, local: Point2, q: &DVector<f64>) -> Option<Point2> {
        self.link_pose(link, q).map(|p| p.apply(local))
    }

    /// Joint coordinate of every driver at `q`.
    pub fn driver_coordinates(&self, q: &DVector<f64>) -> Vec<f64> {
        self.drivers
            .iter()
            .map(|d| self.joint_coordinate(&self.joints[d.index], q))
            .collect()
    }

    fn joint_coordinate(&self, j: &JointEq, q: &DVector<f64>) -> f64 {
        let (pa, pb) = (Self::pose_of(j.a, q), Self::pose_of(j.b, q));
        match j.kind {
            JointKind::Revolute => pb.theta - pa.theta,
            JointKind::Prismatic => {
                let u = pb.rotate(j.axis);
                u.dot(pb.apply(j.pb) - pa.apply(j.pa))
            }
        }
    }

    /// Joint equations only (no driver rows).
    pub fn joint_residual(&self, q: &DVector<f64>) -> DVector<f64> {
        let mut f = DVector::zeros(2 * self.joints.len());
        for (k, j) in self.joints.iter().enumerate() {
            let (pa, pb) = (Self::pose_of(j.a, q), Self::pose_of(j.b, q));
            let (wa, wb) = (pa.apply(j.pa), pb.apply(j.pb));
            match j.kind {
                JointKind::Revolute => {
                    let d = wa - wb;
                    f[2 * k] = d.x;
                    f[2 * k + 1] = d.y;
                }
                JointKind::Prismatic => {
                    let n = pb.rotate(j.axis).perp();
                    f[2 * k] = pb.theta - pa.theta - j.angle;
                    f[2 * k + 1] = n.dot(wb - wa);
                }
            }
        }
        f
    }

    /// Full residual F(q) with driver rows `coordinate - target`.
    pub fn residual(&self, q: &DVector<f64>, drive: &[f64]) -> DVector<f64> {
        let nj = 2 * self.joints.len();
        let mut f = DVector::zeros(self.equation_count());
        f.rows_mut(0, nj).copy_from(&self.joint_residual(q));
        for (k, d) in self.drivers.iter().enumerate() {
            f[nj + k] = self.joint_coordinate(&self.joints[d.index], q) - drive[k];
        }
        f
    }

    /// Analytic dF/dq.
    pub fn jacobian(&self, q: &DVector<f64>) -> DMatrix<f64> {
        let nj = 2 * self.joints.len();
        let mut jac = DMatrix::zeros(self.equation_count(), self.unknown_count());
        // d(world point)/d(theta) = perp(R p)
        let add = |jac: &mut DMatrix<f64>, row: usize, slot: Slot, gx: f64, gy: f64, gt: f64| {
            if let Slot::Free(i) = slot {
                jac[(row, i)] += gx;
                jac[(row, i + 1)] += gy;
                jac[(row, i + 2)] += gt;
            }
        };
        for (k, j) in self.joints.iter().enumerate() {
            let (pa, pb) = (Self::pose_of(j.a, q), Self::pose_of(j.b, q));
            let (ra, rb) = (pa.rotate(j.pa), pb.rotate(j.pb));
            let (ta, tb) = (ra.perp(), rb.perp());
            match j.kind {
                JointKind::Revolute => {
                    add(&mut jac, 2 * k, j.a, 1.0, 0.0, ta.x);
                    add(&mut jac, 2 * k + 1, j.a, 0.0, 1.0, ta.y);
                    add(&mut jac, 2 * k, j.b, -1.0, 0.0, -tb.x);
                    add(&mut jac, 2 * k + 1, j.b, 0.0, -1.0, -tb.y);
                }
                JointKind::Prismatic => {
                    let u = pb.rotate(j.axis);
                    let n = u.perp();
                    let d = (pb.origin() + rb) - (pa.origin() + ra);
                    add(&mut jac, 2 * k, j.a, 0.0, 0.0, -1.0);
                    add(&mut jac, 2 * k, j.b, 0.0, 0.0, 1.0);
                    add(&mut jac, 2 * k + 1, j.a, -n.x, -n.y, -n.dot(ta));
                    add(&mut jac, 2 * k + 1, j.b, n.x, n.y, n.dot(tb) - u.dot(d));
                }
            }
        }
        for (k, dr) in self.drivers.iter().enumerate() {
            let j = &self.joints[dr.index];
            let row = nj + k;
            match j.kind {
                JointKind::Revolute => {
                    add(&mut jac, row, j.a, 0.0, 0.0, -1.0);
                    add(&mut jac, row, j.b, 0.0, 0.0, 1.0);
                }
                JointKind::Prismatic => {
                    let (pa, pb) = (Self::pose_of(j.a, q), Self::pose_of(j.b, q));
                    let (ra, rb) = (pa.rotate(j.pa), pb.rotate(j.pb));
                    let u = pb.rotate(j.axis);
                    let n = u.perp();
                    let d = (pb.origin() + rb) - (pa.origin() + ra);
                    add(&mut jac, row, j.a, -u.x, -u.y, -u.dot(ra.perp()));
                    add(&mut jac, row, j.b, u.x, u.y, u.dot(rb.perp()) + n.dot(d));
                }
            }
        }
        jac
    }

    /// Same equations with the lowest link held fixed; used to re-assemble
    /// ungrounded mechanisms.
    pub(crate) fn assemble_floating(mech: &Mechanism) -> Result<ConstraintSystem> {
        let fixed = mech
            .ground()
            .or_else(|| mech.links.first().map(|l| l.id))
            .ok_or(Error::NoGround(mech.id))?;
        Self::assemble_with_fixed(mech, fixed)
    }
}
