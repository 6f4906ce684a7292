//! Drag the coupler-rocker joint of the four-bar along the rocker, then
//! re-assemble and register an extra traced point.

use sketchmech::fixtures;
use sketchmech::kinematics::{settle, Runner, SolverConfig};
use sketchmech::mechanism::{move_joint, trace_point, JointSide};
use sketchmech::Point2;

fn main() -> sketchmech::Result<()> {
    let mech = fixtures::fb1_mechanism();
    let runner = Runner::new(&mech, SolverConfig::default())?;
    let poses = runner.poses();
    let b = fixtures::fb1::b();
    let joint = mech
        .joints
        .iter()
        .find(|j| j.anchor_a.distance(b) < 1e-9)
        .unwrap();
    let rocker = joint.b;
    let c = fixtures::fb1::C;
    let dir = (b - c).normalized().unwrap();

    let moved = move_joint(&mech, &poses, joint.id, b + dir, JointSide::B)?;
    let anchors = moved.anchors_on(rocker);
    println!(
        "rocker length {} -> {}",
        fixtures::fb1::ROCKER,
        anchors[0].1.distance(anchors[1].1)
    );

    let settled = settle(&moved)?;
    let mut traced = trace_point(&settled, rocker, Point2::new(c.x + 1.0, c.y))?;
    traced.tracked.truncate(2);
    let mut runner = Runner::new(&traced, SolverConfig::default())?;
    let dt = runner.default_dt();
    let out = runner.run(dt, 90)?;
    println!(
        "after the edit: {:?} after {} steps, {} traces",
        out.final_state.status,
        out.states.len(),
        runner.traces.len()
    );
    Ok(())
}
