use sketchmech::{fixtures, sketch};
use std::path::PathBuf;

#[test]
fn fixture_files_match_their_builders() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    for (name, doc) in fixtures::all() {
        let path = dir.join(format!("{name}.mech.json"));
        let on_disk = std::fs::read_to_string(&path).unwrap();
        assert!(
            on_disk == sketch::save(&doc),
            "{} is stale; rerun `cargo run --example generate_fixtures`",
            path.display()
        );
    }
}

#[test]
fn fixture_files_load_with_their_scenes() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    for (name, _) in fixtures::all() {
        let text = std::fs::read(dir.join(format!("{name}.mech.json"))).unwrap();
        let doc = sketch::load(&text).unwrap();
        let mech = doc.content().mechanism.as_ref().expect("fixtures are built");
        assert!(mech.scene.is_some(), "{name} has no built scene");
    }
}
