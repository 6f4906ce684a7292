//! Drive a session with JSON commands exactly as a client would, and keep a
//! replica in sync from the emitted events alone.

use sketchmech::session::{Registry, Replica};
use sketchmech::{fixtures, sketch};

fn main() {
    let mut reg = Registry::new();
    let mut replica = Replica::new();
    let load = serde_json::json!({"type": "load", "text": sketch::save(&fixtures::fb1())});
    let script = [
        r#"{"seq":1,"command":{"type":"create_session"}}"#.to_string(),
        format!(r#"{{"seq":2,"session":"s1","command":{load}}}"#),
        r#"{"seq":3,"session":"s1","command":{"type":"run","cycles":0.25}}"#.to_string(),
    ];
    for line in &script {
        for ev in reg.handle_text(line) {
            replica.apply(&ev);
            let json = ev.to_json();
            println!("<- {}", &json[..json.len().min(110)]);
        }
    }
    let session = reg.session_mut("s1").unwrap();
    while session.is_running() {
        for ev in session.advance(30) {
            replica.apply(&ev);
        }
    }
    let same = serde_json::to_string(&session.snapshot()).unwrap() == replica.to_json();
    println!("revision {}, replica identical: {same}", session.revision());
}
