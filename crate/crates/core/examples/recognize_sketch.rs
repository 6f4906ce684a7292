//! Group the ink of the four-bar fixture into links and turn its circle
//! gestures into revolute joints.

use sketchmech::fixtures;
use sketchmech::recognition::{recognize, RecognitionConfig};

fn main() {
    let doc = fixtures::fb1();
    let rec = recognize(doc.content(), &RecognitionConfig::default());
    println!("grouping distance {:.4}", rec.epsilon);
    for l in &rec.links {
        println!(
            "link {} (palette color {}): strokes {:?}",
            l.id, l.color, l.strokes
        );
    }
    for j in &rec.joints {
        println!(
            "{:?} joint {} between {} and {} at ({:.4}, {:.4})",
            j.kind, j.id, j.a, j.b, j.anchor.x, j.anchor.y
        );
    }
    for w in &rec.warnings {
        println!("gesture {}: {}", w.gesture, w.message);
    }
}
