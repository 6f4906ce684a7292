//! A drum pedal traced over a reference photo: the pedal rocks back and
//! forth under scrub control and the beater head leaves its arc.

use sketchmech::fixtures;
use sketchmech::kinematics::{trace_svg, Runner, SolverConfig};

fn main() -> sketchmech::Result<()> {
    let doc = fixtures::drum_pedal();
    let content = doc.content();
    for u in &content.underlays {
        println!(
            "underlay {} at ({}, {}) scale {}",
            u.image, u.position.x, u.position.y, u.scale
        );
    }
    println!(
        "{} decoration(s) riding on links",
        content.decorations.len()
    );
    let mech = content
        .mechanism
        .as_ref()
        .and_then(|m| m.scene.as_ref())
        .unwrap()
        .instances[0]
        .clone();
    let mut runner = Runner::new(&mech, SolverConfig::default())?;
    for target in [0.6, -0.3, 0.0] {
        runner.scrub(&[target])?;
        let head = runner.traces[0].samples.last().unwrap().p;
        println!(
            "pedal at {:+.2} rad: beater head ({:.4}, {:.4})",
            target, head.x, head.y
        );
    }
    let svg = std::env::temp_dir().join("drum_pedal.svg");
    std::fs::write(&svg, trace_svg(&[&mech], &runner.traces))?;
    println!("wrote {}", svg.display());
    Ok(())
}
