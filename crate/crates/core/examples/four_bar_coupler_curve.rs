//! Drive the crank of a Grashof crank-rocker through one revolution and
//! export the coupler-midpoint curve as CSV and SVG.

use sketchmech::fixtures;
use sketchmech::kinematics::{trace_csv, trace_svg, Runner, SolverConfig};
use sketchmech::mechanism::classify_four_bar;

fn main() -> sketchmech::Result<()> {
    let mech = fixtures::fb1_mechanism();
    if let Some((lengths, class)) = classify_four_bar(&mech) {
        println!("{class:?}: {lengths:?}");
    }
    let mut runner = Runner::new(&mech, SolverConfig::default())?;
    let dt = runner.default_dt();
    let steps = runner.steps_for_cycles(1.0, dt)?;
    let outcome = runner.run(dt, steps)?;
    let trace = &runner.traces[0];
    println!(
        "{} steps, status {:?}, {} samples, closure gap {:.2e}",
        outcome.states.len(),
        outcome.final_state.status,
        trace.samples.len(),
        trace.closure_gap().unwrap_or(f64::NAN)
    );

    let dir = std::env::temp_dir();
    let csv = dir.join("fb1_coupler.csv");
    let svg = dir.join("fb1_coupler.svg");
    std::fs::write(&csv, trace_csv(&runner.traces))?;
    std::fs::write(&svg, trace_svg(&[&mech], &runner.traces))?;
    println!("wrote {} and {}", csv.display(), svg.display());
    Ok(())
}
