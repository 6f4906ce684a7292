//! Oracles shared by the integration tests. Everything here is computed
//! from first principles (stroke geometry, closed-form linkage formulas),
//! not through the library's solver code paths.

#![allow(dead_code)]

use sketchmech::kinematics::{Runner, SimState, SolverConfig};
use sketchmech::mechanism::{Driver, Mechanism};
use sketchmech::recognition::JointKind;
use sketchmech::{fixtures, Id, Point2, Pose};
use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

/// Intersection of two circles; `upper` picks the point left of c1 -> c2.
pub fn circles(c1: Point2, r1: f64, c2: Point2, r2: f64, upper: bool) -> Point2 {
    let (dx, dy) = (c2.x - c1.x, c2.y - c1.y);
    let d = (dx * dx + dy * dy).sqrt();
    let a = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d);
    let h = (r1 * r1 - a * a).max(0.0).sqrt();
    let (mx, my) = (c1.x + a * dx / d, c1.y + a * dy / d);
    let s = if upper { 1.0 } else { -1.0 };
    Point2::new(mx - s * h * dy / d, my + s * h * dx / d)
}

pub fn dist(a: Point2, b: Point2) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

fn wrap(a: f64) -> f64 {
    let r = (a + PI).rem_euclid(TAU) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

fn apply(p: &Pose, local: Point2) -> Point2 {
    let (s, c) = p.theta.sin_cos();
    Point2::new(
        p.x + c * local.x - s * local.y,
        p.y + s * local.x + c * local.y,
    )
}

/// Unit slide direction in world coordinates for b's local `axis`.
fn slide_direction(pb: &Pose, axis: Point2) -> Point2 {
    let n = (axis.x * axis.x + axis.y * axis.y).sqrt();
    apply(
        &Pose::new(0.0, 0.0, pb.theta),
        Point2::new(axis.x / n, axis.y / n),
    )
}

/// Link poses decoded straight from the coordinate vector: (x, y, theta)
/// for every non-ground link in id order, the ground at its reference pose.
pub fn decode(mech: &Mechanism, q: &[f64]) -> BTreeMap<Id, Pose> {
    let mut out = BTreeMap::new();
    let mut k = 0;
    let mut links: Vec<_> = mech.links.iter().collect();
    links.sort_by_key(|l| l.id);
    for l in links {
        if l.is_ground {
            out.insert(l.id, l.reference_pose);
        } else {
            out.insert(l.id, Pose::new(q[3 * k], q[3 * k + 1], q[3 * k + 2]));
            k += 1;
        }
    }
    out
}

/// World position of a joint, seen from its `b` link.
pub fn joint_world(mech: &Mechanism, poses: &BTreeMap<Id, Pose>, joint: Id) -> Point2 {
    let j = mech.joints.iter().find(|j| j.id == joint).unwrap();
    apply(&poses[&j.b], j.anchor_b)
}

/// Norm of all joint and driver equations at `state`, evaluated from the
/// joint definitions. Revolute: coincident anchors. Prismatic: fixed
/// relative angle and b's slide line through a's pin. Drivers: relative
/// angle (mod 2 pi) or slide offset equal to the commanded coordinate,
/// drivers taken in joint order.
pub fn independent_residual(mech: &Mechanism, state: &SimState) -> f64 {
    let poses = decode(mech, &state.q);
    let reference: BTreeMap<Id, Pose> = mech
        .links
        .iter()
        .map(|l| (l.id, l.reference_pose))
        .collect();
    let mut sq = 0.0;
    let mut driven = Vec::new();
    for j in &mech.joints {
        let (pa, pb) = (poses[&j.a], poses[&j.b]);
        let (wa, wb) = (apply(&pa, j.anchor_a), apply(&pb, j.anchor_b));
        match j.kind {
            JointKind::Revolute => {
                sq += (wa.x - wb.x).powi(2) + (wa.y - wb.y).powi(2);
            }
            JointKind::Prismatic => {
                let locked = reference[&j.b].theta - reference[&j.a].theta;
                sq += wrap(pb.theta - pa.theta - locked).powi(2);
                let u = slide_direction(&pb, j.axis_b.unwrap());
                let off = (wb.x - wa.x) * -u.y + (wb.y - wa.y) * u.x;
                sq += off * off;
            }
        }
        if let Some(Driver { .. }) = j.driver {
            let coord = match j.kind {
                JointKind::Revolute => pb.theta - pa.theta,
                JointKind::Prismatic => {
                    let u = slide_direction(&pb, j.axis_b.unwrap());
                    u.x * (wb.x - wa.x) + u.y * (wb.y - wa.y)
                }
            };
            driven.push((j.id, j.kind, coord));
        }
    }
    for (k, (_, kind, coord)) in driven.iter().enumerate() {
        let e = coord - state.drive[k];
        sq += match kind {
            JointKind::Revolute => wrap(e).powi(2),
            JointKind::Prismatic => e * e,
        };
    }
    sq.sqrt()
}

/// Every fixture mechanism that can be simulated, with a second input on
/// the five-bar so its two degrees of freedom are driven.
pub fn runnable() -> Vec<(&'static str, Mechanism)> {
    let mut five = fixtures::five_bar_mechanism();
    let ground = five.ground().unwrap();
    let other = five
        .joints
        .iter_mut()
        .find(|j| j.a == ground && j.driver.is_none())
        .unwrap();
    other.is_input = true;
    other.driver = Some(Driver {
        joint: other.id,
        rate: 0.5,
    });
    let two = fixtures::two_four_bars();
    let scene = two
        .content()
        .mechanism
        .as_ref()
        .unwrap()
        .scene
        .clone()
        .unwrap();
    let pedal = fixtures::drum_pedal();
    let pedal = pedal
        .content()
        .mechanism
        .as_ref()
        .unwrap()
        .scene
        .clone()
        .unwrap()
        .instances[0]
        .clone();
    vec![
        ("fb1", fixtures::fb1_mechanism()),
        ("sc1", fixtures::sc1_mechanism()),
        ("pg1", fixtures::pg1_mechanism()),
        ("ng1", fixtures::ng1_mechanism()),
        ("five_bar", five),
        ("drum_pedal", pedal),
        ("two_four_bars.0", scene.instances[0].clone()),
        ("two_four_bars.1", scene.instances[1].clone()),
    ]
}

/// One full input cycle (or until the run halts) at the default step.
pub fn run_cycle(mech: &Mechanism) -> (Runner, Vec<SimState>) {
    let mut runner = Runner::new(mech, SolverConfig::default()).unwrap();
    let dt = runner.default_dt();
    let steps = runner.steps_for_cycles(1.0, dt).unwrap_or(360);
    let out = runner.run(dt, steps).unwrap();
    (runner, out.states)
}

/// Joint whose build anchor is at `p`.
pub fn joint_at(mech: &Mechanism, p: Point2) -> Id {
    mech.joints
        .iter()
        .find(|j| dist(j.anchor_a, p) < 1e-9 || dist(j.anchor_b, p) < 1e-9)
        .unwrap()
        .id
}

fn envelope(seq: u64, command: serde_json::Value) -> String {
    serde_json::json!({"seq": seq, "session": "s1", "command": command}).to_string()
}

/// Fifty wire commands that sketch FB1 stroke by stroke, recognize and
/// build it, run, scrub and pause it, edit joints, traces, underlays and
/// decorations, undo/redo, and export. The first command creates session
/// `s1`.
pub fn fb1_script() -> Vec<String> {
    use serde_json::json;
    let doc = fixtures::fb1();
    let strokes = &doc.content().strokes;
    let ink: Vec<_> = strokes.iter().filter(|s| s.is_ink()).collect();
    let gestures: Vec<_> = strokes.iter().filter(|s| !s.is_ink()).collect();
    assert_eq!((ink.len(), gestures.len()), (4, 4));
    let b = fixtures::fb1::b();
    let c = fixtures::fb1::C;
    let u = Point2::new((b.x - c.x) / 5.0, (b.y - c.y) / 5.0);
    let mid = Point2::new(
        (fixtures::fb1::A.x + b.x) / 2.0,
        (fixtures::fb1::A.y + b.y) / 2.0,
    );

    let mut cmds: Vec<serde_json::Value> = Vec::new();
    for s in &ink {
        cmds.push(json!({"type": "add_stroke", "points": s.points, "t": s.t, "mode": "ink"}));
    }
    cmds.push(json!({"type": "recognize"}));
    cmds.push(json!({"type": "mark_ground", "link": 1}));
    for g in &gestures {
        cmds.push(json!({"type": "add_joint_gesture", "points": g.points, "t": g.t}));
    }
    // joints take the ids of their gestures: 5 (O), 6 (A), 7 (B), 8 (C)
    cmds.extend([
        json!({"type": "select_input", "joint": 5}),
        json!({"type": "set_driver", "joint": 5, "rate": 1.0}),
        json!({"type": "build"}),
        json!({"type": "trace_point", "link": 3, "point": mid}),
        json!({"type": "run", "cycles": 0.25}),
        json!({"type": "pause"}),
        json!({"type": "scrub", "target": [1.0]}),
        json!({"type": "scrub", "target": [0.5]}),
        json!({"type": "run", "rates": [-1.0], "duration": 0.3}),
        json!({"type": "clear_trace"}),
        json!({"type": "move_joint", "joint": 7, "to": [b.x + 0.5 * u.x, b.y + 0.5 * u.y], "side": "b"}),
        json!({"type": "run", "cycles": 0.1}),
        json!({"type": "pause"}),
        json!({"type": "scrub", "target": [0.2]}),
        json!({"type": "export_trace", "format": "csv"}),
        json!({"type": "export_trace", "format": "svg"}),
        json!({"type": "save"}),
        json!({"type": "snapshot"}),
        json!({"type": "set_underlay", "image": "images/fb1.png", "position": [-1.0, -2.0], "scale": 0.02}),
        json!({"type": "attach_decoration", "host": 3, "strokes": [{"points": [[4.0, 3.0], [4.5, 3.5], [5.0, 3.0]], "t": [0.0, 8.0, 16.0]}]}),
        json!({"type": "add_stroke", "points": [[20.0, 20.0], [20.5, 20.2]], "t": [0.0, 5.0], "mode": "gesture"}),
        json!({"type": "undo"}),
        json!({"type": "redo"}),
        json!({"type": "undo"}),
        json!({"type": "add_stroke", "points": [[1.0, 9.0], [3.0, 9.0], [5.0, 9.0]], "t": [0.0, 10.0, 20.0], "mode": "ink"}),
        json!({"type": "recognize"}),
        json!({"type": "erase_stroke", "stroke": 12}),
        json!({"type": "recognize"}),
        json!({"type": "deselect_input", "joint": 5}),
        json!({"type": "select_input", "joint": 5}),
        json!({"type": "set_driver", "joint": 5, "rate": -2.0}),
        json!({"type": "build"}),
        json!({"type": "run", "cycles": 0.5}),
        json!({"type": "scrub", "target": [-0.25]}),
        json!({"type": "pause"}),
        json!({"type": "trace_point", "link": 4, "point": [c.x + 2.0 * u.x, c.y + 2.0 * u.y]}),
        json!({"type": "undo"}),
        json!({"type": "redo"}),
        json!({"type": "snapshot"}),
    ]);
    let mut out =
        vec![serde_json::json!({"seq": 1, "command": {"type": "create_session"}}).to_string()];
    out.extend(
        cmds.into_iter()
            .enumerate()
            .map(|(k, c)| envelope(k as u64 + 2, c)),
    );
    out
}
