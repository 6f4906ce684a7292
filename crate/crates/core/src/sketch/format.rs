//! The `.mech.json` document format.
//!
//! ```text
//! { "version": 1, "strokes": [...], "underlays": [...],
//!   "decorations": [...], "mechanism": {...} | null }
//! ```
//!
//! Numbers are written as shortest round-trippable decimals, so
//! `save(load(save(doc)))` is byte-identical to `save(doc)`. Edit history is
//! not persisted.

use super::{Decoration, DocumentContent, ImageUnderlay, SketchDocument, Stroke};
use crate::error::{Error, Result};
use crate::mechanism::MechanismState;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Serialize)]
struct FileRef<'a> {
    version: u64,
    strokes: &'a [Stroke],
    underlays: &'a [ImageUnderlay],
    decorations: &'a [Decoration],
    mechanism: &'a Option<MechanismState>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileV1 {
    #[allow(dead_code)]
    version: u64,
    strokes: Vec<Stroke>,
    underlays: Vec<ImageUnderlay>,
    decorations: Vec<Decoration>,
    mechanism: Option<MechanismState>,
}

#[derive(Deserialize)]
struct VersionProbe {
    version: u64,
}

fn format_error(e: serde_json::Error) -> Error {
    Error::FormatError {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// Serialize a document's content in canonical form.
pub fn save(doc: &SketchDocument) -> String {
    save_content(doc.content())
}

pub(crate) fn save_content(c: &DocumentContent) -> String {
    let file = FileRef {
        version: FORMAT_VERSION,
        strokes: &c.strokes,
        underlays: &c.underlays,
        decorations: &c.decorations,
        mechanism: &c.mechanism,
    };
    let mut s = serde_json::to_string_pretty(&file).expect("document serializes");
    s.push('\n');
    s
}

/// Parse a document. History starts empty.
pub fn load(bytes: &[u8]) -> Result<SketchDocument> {
    Ok(SketchDocument::from_content(load_content(bytes)?))
}

pub(crate) fn load_content(bytes: &[u8]) -> Result<DocumentContent> {
    let probe: VersionProbe = serde_json::from_slice(bytes).map_err(format_error)?;
    if probe.version != FORMAT_VERSION {
        return Err(Error::VersionError {
            found: probe.version,
            expected: FORMAT_VERSION,
        });
    }
    let file: FileV1 = serde_json::from_slice(bytes).map_err(format_error)?;

    let mut seen = BTreeSet::new();
    let ids = file
        .strokes
        .iter()
        .map(|s| s.id)
        .chain(file.underlays.iter().map(|u| u.id))
        .chain(
            file.decorations
                .iter()
                .flat_map(|d| std::iter::once(d.id).chain(d.strokes.iter().map(|s| s.id))),
        );
    for id in ids {
        if !seen.insert(id) {
            return Err(Error::FormatError {
                line: 0,
                column: 0,
                message: format!("duplicate id {id}"),
            });
        }
    }
    if let Some(u) = file
        .underlays
        .iter()
        .find(|u| u.scale.is_nan() || u.scale <= 0.0)
    {
        return Err(Error::FormatError {
            line: 0,
            column: 0,
            message: format!("underlay {} has non-positive scale", u.id),
        });
    }

    let mut content = DocumentContent {
        strokes: file.strokes,
        underlays: file.underlays,
        decorations: file.decorations,
        mechanism: file.mechanism,
        next_id: 0,
    };
    content.strokes.sort_by_key(|s| s.id);
    content.recompute_next_id();
    Ok(content)
}
