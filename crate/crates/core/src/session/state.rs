//! Observable session state and the deltas that move a client copy from
//! one revision to the next.

use super::protocol::{Event, EventEnvelope};
use crate::kinematics::{SimState, Trace};
use crate::mechanism::MechanismState;
use crate::sketch::{Decoration, DocumentContent, ImageUnderlay, Stroke};
use crate::Id;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Simulation of one mechanism instance as seen by clients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimView {
    pub state: SimState,
    pub traces: Vec<Trace>,
    pub running: bool,
    pub rates: Vec<f64>,
    pub dt: f64,
}

/// Everything a client needs to render a session.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionState {
    pub session: String,
    pub revision: u64,
    pub document: DocumentContent,
    pub sims: BTreeMap<Id, SimView>,
}

/// One component-level change. Strokes are immutable once created, so
/// they travel as additions and removals; other components are replaced
/// whole.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "component", rename_all = "snake_case", deny_unknown_fields)]
pub enum Change {
    StrokesAdded { strokes: Vec<Stroke> },
    StrokesRemoved { ids: Vec<Id> },
    Underlays { underlays: Vec<ImageUnderlay> },
    Decorations { decorations: Vec<Decoration> },
    Mechanism { mechanism: Option<MechanismState> },
    NextId { next_id: u64 },
    Sim { instance: Id, sim: Option<SimView> },
}

/// Changes turning `old` into `new` (revision and session id excluded).
pub fn diff(old: &SessionState, new: &SessionState) -> Vec<Change> {
    let mut out = Vec::new();
    let (a, b) = (&old.document, &new.document);
    let removed: Vec<Id> = a
        .strokes
        .iter()
        .filter(|s| b.stroke(s.id).is_none())
        .map(|s| s.id)
        .collect();
    if !removed.is_empty() {
        out.push(Change::StrokesRemoved { ids: removed });
    }
    let added: Vec<Stroke> = b
        .strokes
        .iter()
        .filter(|s| a.stroke(s.id).is_none())
        .cloned()
        .collect();
    if !added.is_empty() {
        out.push(Change::StrokesAdded { strokes: added });
    }
    if a.underlays != b.underlays {
        out.push(Change::Underlays {
            underlays: b.underlays.clone(),
        });
    }
    if a.decorations != b.decorations {
        out.push(Change::Decorations {
            decorations: b.decorations.clone(),
        });
    }
    if a.mechanism != b.mechanism {
        out.push(Change::Mechanism {
            mechanism: b.mechanism.clone(),
        });
    }
    if a.next_id != b.next_id {
        out.push(Change::NextId { next_id: b.next_id });
    }
    let keys: std::collections::BTreeSet<Id> =
        old.sims.keys().chain(new.sims.keys()).copied().collect();
    for k in keys {
        let (x, y) = (old.sims.get(&k), new.sims.get(&k));
        if x != y {
            out.push(Change::Sim {
                instance: k,
                sim: y.cloned(),
            });
        }
    }
    out
}

/// Apply changes in order.
pub fn apply(state: &mut SessionState, changes: &[Change]) {
    let doc = &mut state.document;
    for c in changes {
        match c {
            Change::StrokesAdded { strokes } => {
                doc.strokes.extend(strokes.iter().cloned());
                doc.strokes.sort_by_key(|s| s.id);
            }
            Change::StrokesRemoved { ids } => doc.strokes.retain(|s| !ids.contains(&s.id)),
            Change::Underlays { underlays } => doc.underlays = underlays.clone(),
            Change::Decorations { decorations } => doc.decorations = decorations.clone(),
            Change::Mechanism { mechanism } => doc.mechanism = mechanism.clone(),
            Change::NextId { next_id } => doc.next_id = *next_id,
            Change::Sim { instance, sim } => match sim {
                Some(v) => {
                    state.sims.insert(*instance, v.clone());
                }
                None => {
                    state.sims.remove(instance);
                }
            },
        }
    }
}

/// A client-side copy driven only by events.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Replica {
    pub state: SessionState,
}

impl Replica {
    pub fn new() -> Self {
        Self::default()
    }

    /// Apply one event. Returns false when a delta does not follow the
    /// replica's revision, in which case the client must request a
    /// snapshot.
    pub fn apply(&mut self, env: &EventEnvelope) -> bool {
        match &env.event {
            Event::SessionCreated => {
                self.state = SessionState {
                    session: env.session.clone().unwrap_or_default(),
                    revision: env.revision,
                    ..Default::default()
                };
            }
            Event::Snapshot { state } => self.state = (**state).clone(),
            Event::Delta { changes } => {
                if env.revision != self.state.revision + 1 {
                    return false;
                }
                apply(&mut self.state, changes);
                self.state.revision = env.revision;
            }
            Event::Sim {
                instance,
                state,
                running,
                appended,
            } => {
                let Some(view) = self.state.sims.get_mut(instance) else {
                    return false;
                };
                view.state = state.clone();
                view.running = *running;
                for a in appended {
                    if let Some(tr) = view.traces.get_mut(a.trace) {
                        tr.samples.extend(a.samples.iter().copied());
                        tr.closed = a.closed;
                    }
                }
            }
            _ => {}
        }
        true
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.state).expect("state serializes")
    }
}
