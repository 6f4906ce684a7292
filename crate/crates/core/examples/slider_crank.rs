//! Slider-crank: compare the simulated slider travel with the closed form
//! x = r cos(theta) + sqrt(l^2 - r^2 sin^2(theta)).

use sketchmech::fixtures::{self, sc1};
use sketchmech::kinematics::{Runner, SolverConfig};

fn main() -> sketchmech::Result<()> {
    let mech = fixtures::sc1_mechanism();
    let mut runner = Runner::new(&mech, SolverConfig::default())?;
    let dt = runner.default_dt();
    let start = sc1::BUILD_ANGLE_DEG.to_radians();
    let mut worst: f64 = 0.0;
    for state in runner.run(dt, 360)?.states {
        let theta = start + state.drive[0];
        let expected = sc1::CRANK * theta.cos()
            + (sc1::ROD.powi(2) - (sc1::CRANK * theta.sin()).powi(2)).sqrt();
        let x = runner.traces[0]
            .samples
            .iter()
            .find(|s| s.t == state.t)
            .map(|s| s.p.x)
            .unwrap();
        worst = worst.max((x - expected).abs());
    }
    println!("max |x - closed form| over 360 steps: {worst:.2e}");
    Ok(())
}
