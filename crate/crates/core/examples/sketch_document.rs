//! Capture strokes, undo and redo them, and round-trip the document through
//! the `.mech.json` text format.

use sketchmech::sketch::{self, SketchDocument, StrokeMode};
use sketchmech::Point2;

fn main() -> sketchmech::Result<()> {
    let mut doc = SketchDocument::new();
    let line: Vec<(Point2, f64)> = (0..20)
        .map(|k| (Point2::new(k as f64 * 0.5, 0.0), k as f64 * 16.0))
        .collect();
    let bar = doc.add_stroke(&line, StrokeMode::Ink)?;
    let arc: Vec<(Point2, f64)> = (0..=32)
        .map(|k| {
            let a = k as f64 / 32.0 * std::f64::consts::TAU;
            (Point2::new(0.4 * a.cos(), 0.4 * a.sin()), k as f64 * 10.0)
        })
        .collect();
    let circle = doc.add_stroke(&arc, StrokeMode::Gesture)?;
    println!(
        "ink {bar}, gesture {circle}, {} strokes",
        doc.content().strokes.len()
    );

    doc.undo();
    println!("after undo: {} stroke(s)", doc.content().strokes.len());
    doc.redo();
    println!("after redo: {} stroke(s)", doc.content().strokes.len());

    // a single sample is rejected and leaves the document untouched
    let err = doc
        .add_stroke(&[(Point2::new(3.0, 3.0), 0.0)], StrokeMode::Ink)
        .unwrap_err();
    println!("rejected: {err}");

    doc.set_underlay("images/reference.png", Point2::new(-1.0, -1.0), 0.01, 0.0)?;
    let text = sketch::save(&doc);
    let back = sketch::load(text.as_bytes())?;
    assert_eq!(sketch::save(&back), text);
    println!("saved {} bytes; load/save is a fixpoint", text.len());
    Ok(())
}
