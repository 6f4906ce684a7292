//! Regenerate the `.mech.json` fixtures under `crates/core/fixtures/`.
//!
//! ```text
//! cargo run --example generate_fixtures [OUT_DIR]
//! ```

use sketchmech::{fixtures, sketch};
use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    std::fs::create_dir_all(&dir)?;
    for (name, doc) in fixtures::all() {
        let path = dir.join(format!("{name}.mech.json"));
        std::fs::write(&path, sketch::save(&doc))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
