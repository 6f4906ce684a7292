//! Two independent four-bars drawn in one sketch become two instances that
//! simulate separately, here with opposite input directions.

use sketchmech::fixtures;
use sketchmech::kinematics::{Runner, SolverConfig};

fn main() -> sketchmech::Result<()> {
    let doc = fixtures::two_four_bars();
    let scene = doc
        .content()
        .mechanism
        .as_ref()
        .and_then(|m| m.scene.clone())
        .unwrap();
    for mech in &scene.instances {
        let mut runner = Runner::new(mech, SolverConfig::default())?;
        let dt = runner.default_dt();
        let steps = runner.steps_for_cycles(1.0, dt)?;
        let out = runner.run(dt, steps)?;
        println!(
            "instance {}: {} links, rate {}, {:?}, trace closed: {}",
            mech.id,
            mech.links.len(),
            runner.rates()[0],
            out.final_state.status,
            runner.traces[0].closed
        );
    }
    Ok(())
}
