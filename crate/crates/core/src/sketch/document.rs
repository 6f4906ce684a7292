use super::{Decoration, ImageUnderlay, Stroke, StrokeMode};
use crate::error::{Error, Result};
use crate::geom::{Aabb, Point2};
use crate::mechanism::MechanismState;
use crate::Id;
use serde::{Deserialize, Serialize};

/// Everything that is persisted and versioned by undo/redo.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocumentContent {
    /// Sorted by id.
    pub strokes: Vec<Stroke>,
    pub underlays: Vec<ImageUnderlay>,
    pub decorations: Vec<Decoration>,
    pub mechanism: Option<MechanismState>,
    /// Last id handed out.
    pub(crate) next_id: u64,
}

impl DocumentContent {
    pub(crate) fn fresh_id(&mut self) -> Id {
        self.next_id += 1;
        Id(self.next_id)
    }

    /// Smallest counter that cannot collide with any stored id.
    pub(crate) fn recompute_next_id(&mut self) {
        let strokes = self.strokes.iter().map(|s| s.id.0);
        let underlays = self.underlays.iter().map(|u| u.id.0);
        let decorations = self
            .decorations
            .iter()
            .flat_map(|d| std::iter::once(d.id.0).chain(d.strokes.iter().map(|s| s.id.0)));
        self.next_id = strokes
            .chain(underlays)
            .chain(decorations)
            .max()
            .unwrap_or(0);
    }

    pub fn stroke(&self, id: Id) -> Option<&Stroke> {
        self.strokes
            .binary_search_by_key(&id, |s| s.id)
            .ok()
            .map(|i| &self.strokes[i])
    }

    pub fn ink_strokes(&self) -> impl Iterator<Item = &Stroke> {
        self.strokes.iter().filter(|s| s.mode == StrokeMode::Ink)
    }

    pub fn gesture_strokes(&self) -> impl Iterator<Item = &Stroke> {
        self.strokes
            .iter()
            .filter(|s| s.mode == StrokeMode::Gesture)
    }

    /// Bounding box of all strokes (ink and gesture).
    pub fn bounds(&self) -> Option<Aabb> {
        Aabb::from_points(self.strokes.iter().flat_map(|s| s.points.iter()))
    }

    /// Diagonal of [`Self::bounds`], or 1 for an empty scene.
    pub fn scene_diagonal(&self) -> f64 {
        match self.bounds().map(|b| b.diagonal()) {
            Some(d) if d > 0.0 => d,
            _ => 1.0,
        }
    }

    fn has_link(&self, id: Id) -> bool {
        self.mechanism.as_ref().is_some_and(|m| m.has_link(id))
    }
}

/// An editable sketch with unbounded undo/redo. Every mutation goes through
/// [`SketchDocument::edit`], which records exactly one history entry.
#[derive(Debug, Clone, Default)]
pub struct SketchDocument {
    content: DocumentContent,
    undo: Vec<DocumentContent>,
    redo: Vec<DocumentContent>,
}

impl SketchDocument {
    pub fn new() -> Self {
        Self::default()
    }

    /// A document with no history.
    pub fn from_content(mut content: DocumentContent) -> Self {
        content.strokes.sort_by_key(|s| s.id);
        content.recompute_next_id();
        Self {
            content,
            undo: Vec::new(),
            redo: Vec::new(),
        }
    }

    pub fn content(&self) -> &DocumentContent {
        &self.content
    }

    pub fn history_depth(&self) -> (usize, usize) {
        (self.undo.len(), self.redo.len())
    }

    /// Applies `f` to a copy of the content; on success the copy replaces the
    /// current content and the previous content is pushed on the undo stack.
    pub fn edit<T>(&mut self, f: impl FnOnce(&mut DocumentContent) -> Result<T>) -> Result<T> {
        let mut next = self.content.clone();
        let out = f(&mut next)?;
        let prev = std::mem::replace(&mut self.content, next);
        self.undo.push(prev);
        self.redo.clear();
        Ok(out)
    }

    pub fn undo(&mut self) -> bool {
        match self.undo.pop() {
            Some(prev) => {
                let cur = std::mem::replace(&mut self.content, prev);
                self.redo.push(cur);
                true
            }
            None => false,
        }
    }

    pub fn redo(&mut self) -> bool {
        match self.redo.pop() {
            Some(next) => {
                let cur = std::mem::replace(&mut self.content, next);
                self.undo.push(cur);
                true
            }
            None => false,
        }
    }

    pub fn add_stroke(&mut self, samples: &[(Point2, f64)], mode: StrokeMode) -> Result<Id> {
        let (points, t) = samples.iter().copied().unzip();
        self.add_stroke_parts(points, t, mode)
    }

    pub fn add_stroke_parts(
        &mut self,
        points: Vec<Point2>,
        t: Vec<f64>,
        mode: StrokeMode,
    ) -> Result<Id> {
        // validate before touching history
        Stroke::new(Id(0), mode, points.clone(), t.clone())?;
        self.edit(|c| {
            let id = c.fresh_id();
            c.strokes.push(Stroke {
                id,
                mode,
                points,
                t,
            });
            Ok(id)
        })
    }

    pub fn erase_stroke(&mut self, id: Id) -> Result<()> {
        self.edit(|c| {
            let idx = c
                .strokes
                .binary_search_by_key(&id, |s| s.id)
                .map_err(|_| Error::unknown("stroke", id))?;
            c.strokes.remove(idx);
            Ok(())
        })
    }

    pub fn set_underlay(
        &mut self,
        image: &str,
        position: Point2,
        scale: f64,
        rotation: f64,
    ) -> Result<Id> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "underlay scale must be > 0, got {scale}"
            )));
        }
        if !position.is_finite() || !rotation.is_finite() {
            return Err(Error::InvalidParameter(
                "underlay placement must be finite".into(),
            ));
        }
        self.edit(|c| {
            let id = c.fresh_id();
            c.underlays.push(ImageUnderlay {
                id,
                image: image.to_string(),
                position,
                scale,
                rotation,
            });
            Ok(id)
        })
    }

    pub fn remove_underlay(&mut self, id: Id) -> Result<()> {
        self.edit(|c| {
            let before = c.underlays.len();
            c.underlays.retain(|u| u.id != id);
            if c.underlays.len() == before {
                return Err(Error::unknown("underlay", id));
            }
            Ok(())
        })
    }

    /// Attach strokes (given in the host link's local frame) to a recognized
    /// link.
    pub fn attach_decoration(
        &mut self,
        host: Id,
        strokes: Vec<(Vec<Point2>, Vec<f64>)>,
    ) -> Result<Id> {
        if !self.content.has_link(host) {
            return Err(Error::unknown("link", host));
        }
        for (p, t) in &strokes {
            Stroke::new(Id(0), StrokeMode::Ink, p.clone(), t.clone())?;
        }
        self.edit(|c| {
            let id = c.fresh_id();
            let strokes = strokes
                .into_iter()
                .map(|(points, t)| Stroke {
                    id: c.fresh_id(),
                    mode: StrokeMode::Ink,
                    points,
                    t,
                })
                .collect();
            c.decorations.push(Decoration { id, host, strokes });
            Ok(id)
        })
    }

    pub fn set_mechanism(&mut self, state: Option<MechanismState>) -> Result<()> {
        self.edit(|c| {
            c.mechanism = state;
            Ok(())
        })
    }
}
