use super::{GestureWarning, JointHypothesis, LinkHypothesis, Recognition, UnionFind};
use crate::error::{Error, Result};
use crate::Id;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Joint marker colors shown by the UI: joints are blue until selected as
/// an input, then red.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarkerColor {
    Blue,
    Red,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "marker", rename_all = "snake_case")]
pub enum MarkerEvent {
    Ground {
        link: Id,
        cleared: Option<Id>,
    },
    Joint {
        joint: Id,
        from: MarkerColor,
        to: MarkerColor,
    },
}

/// Recognized hypotheses plus the user's ground and input choices: the
/// mechanism under construction on the Build tab.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildDraft {
    pub links: Vec<LinkHypothesis>,
    pub joints: Vec<JointHypothesis>,
    /// One ground link per connected instance.
    pub ground: BTreeSet<Id>,
    /// Input joints and their driver rates (rad/s or units/s).
    pub inputs: BTreeMap<Id, f64>,
    #[serde(default)]
    pub warnings: Vec<GestureWarning>,
}

pub(crate) const DEFAULT_DRIVER_RATE: f64 = 1.0;

impl BuildDraft {
    pub fn from_recognition(rec: &Recognition) -> Self {
        Self {
            links: rec.links.clone(),
            joints: rec.joints.clone(),
            ground: BTreeSet::new(),
            inputs: BTreeMap::new(),
            warnings: rec.warnings.clone(),
        }
    }

    /// Replace hypotheses after re-recognition, carrying ground marks over by
    /// stroke membership and inputs by gesture id.
    pub fn refresh(&self, rec: &Recognition) -> Self {
        let mut next = Self::from_recognition(rec);
        for g in &self.ground {
            let Some(old) = self.links.iter().find(|l| l.id == *g) else {
                continue;
            };
            if let Some(new) = rec
                .links
                .iter()
                .find(|l| old.strokes.iter().any(|s| l.strokes.contains(s)))
            {
                // go through mark_ground so the one-ground rule holds after merges
                let _ = next.mark_ground(new.id);
            }
        }
        for (j, rate) in &self.inputs {
            if next.joints.iter().any(|h| h.id == *j) && next.select_input(*j).is_ok() {
                next.inputs.insert(*j, *rate);
            }
        }
        next
    }

    pub fn link(&self, id: Id) -> Option<&LinkHypothesis> {
        self.links.iter().find(|l| l.id == id)
    }

    pub fn joint(&self, id: Id) -> Option<&JointHypothesis> {
        self.joints.iter().find(|j| j.id == id)
    }

    /// Connected components of the link-joint graph, each sorted, ordered by
    /// lowest link id.
    pub fn instances(&self) -> Vec<Vec<Id>> {
        let ids: Vec<Id> = self.links.iter().map(|l| l.id).collect();
        components(&ids, self.joints.iter().map(|j| (j.a, j.b)))
    }

    fn instance_of(&self, link: Id) -> Vec<Id> {
        self.instances()
            .into_iter()
            .find(|c| c.contains(&link))
            .unwrap_or_default()
    }

    /// Mark a link as ground, clearing any previous ground in its instance.
    pub fn mark_ground(&mut self, link: Id) -> Result<MarkerEvent> {
        if self.link(link).is_none() {
            return Err(Error::unknown("link", link));
        }
        let instance = self.instance_of(link);
        let cleared = self
            .ground
            .iter()
            .copied()
            .find(|g| *g != link && instance.contains(g));
        if let Some(c) = cleared {
            self.ground.remove(&c);
        }
        self.ground.insert(link);
        Ok(MarkerEvent::Ground { link, cleared })
    }

    /// Select a joint as a driven input. Its instance must contain a ground
    /// link.
    pub fn select_input(&mut self, joint: Id) -> Result<MarkerEvent> {
        let j = self.joint(joint).ok_or(Error::unknown("joint", joint))?;
        let instance = self.instance_of(j.a);
        if !self.ground.iter().any(|g| instance.contains(g)) {
            return Err(Error::InvalidInput(format!(
                "joint {joint} is not connected to a ground link"
            )));
        }
        let from = if self.inputs.contains_key(&joint) {
            MarkerColor::Red
        } else {
            MarkerColor::Blue
        };
        self.inputs.entry(joint).or_insert(DEFAULT_DRIVER_RATE);
        Ok(MarkerEvent::Joint {
            joint,
            from,
            to: MarkerColor::Red,
        })
    }

    pub fn deselect_input(&mut self, joint: Id) -> Result<MarkerEvent> {
        if self.joint(joint).is_none() {
            return Err(Error::unknown("joint", joint));
        }
        let from = if self.inputs.remove(&joint).is_some() {
            MarkerColor::Red
        } else {
            MarkerColor::Blue
        };
        Ok(MarkerEvent::Joint {
            joint,
            from,
            to: MarkerColor::Blue,
        })
    }

    /// Set the signed driver rate of an input joint (selecting it if needed).
    pub fn set_driver(&mut self, joint: Id, rate: f64) -> Result<Option<MarkerEvent>> {
        if !rate.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "driver rate must be finite, got {rate}"
            )));
        }
        let ev = if self.inputs.contains_key(&joint) {
            None
        } else {
            Some(self.select_input(joint)?)
        };
        self.inputs.insert(joint, rate);
        Ok(ev)
    }

    pub fn marker_color(&self, joint: Id) -> MarkerColor {
        if self.inputs.contains_key(&joint) {
            MarkerColor::Red
        } else {
            MarkerColor::Blue
        }
    }
}

/// Connected components over `nodes` given undirected `edges`.
pub(crate) fn components(nodes: &[Id], edges: impl IntoIterator<Item = (Id, Id)>) -> Vec<Vec<Id>> {
    let mut sorted = nodes.to_vec();
    sorted.sort();
    let index = |id: Id| sorted.binary_search(&id).ok();
    let mut uf = UnionFind::new(sorted.len());
    for (a, b) in edges {
        if let (Some(i), Some(j)) = (index(a), index(b)) {
            uf.union(i, j);
        }
    }
    let mut groups: BTreeMap<usize, Vec<Id>> = BTreeMap::new();
    for (i, id) in sorted.iter().enumerate() {
        groups.entry(uf.find(i)).or_default().push(*id);
    }
    let mut out: Vec<Vec<Id>> = groups.into_values().collect();
    out.sort_by_key(|g| g[0]);
    out
}
