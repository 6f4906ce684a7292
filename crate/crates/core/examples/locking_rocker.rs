//! A non-Grashof linkage driven from a rocker halts at the position where
//! the coupler and output become collinear.

use sketchmech::fixtures::{self, ng1};
use sketchmech::kinematics::{Runner, SimStatus, SolverConfig};

fn main() -> sketchmech::Result<()> {
    let mech = fixtures::ng1_mechanism();
    let mut runner = Runner::new(&mech, SolverConfig::default())?;
    let dt = runner.default_dt();
    let out = runner.run(dt, 360)?;
    assert_eq!(out.final_state.status, SimStatus::Locked);
    let limit = out.final_state.blocked_at.as_ref().unwrap()[0];
    // the input reaches its limit when |BD| = coupler + output
    let reach = ng1::COUPLER + ng1::OUTPUT;
    let tangency = ((ng1::GROUND.powi(2) + ng1::INPUT.powi(2) - reach.powi(2))
        / (2.0 * ng1::GROUND * ng1::INPUT))
        .acos();
    println!(
        "locked after {} steps at input {:.9} deg (tangency {:.9} deg)",
        out.states.len(),
        ng1::BUILD_ANGLE_DEG + limit.to_degrees(),
        tangency.to_degrees()
    );
    Ok(())
}
