use super::protocol::{
    Command, CommandEnvelope, Event, EventEnvelope, ExportFormat, StrokeData, TraceAppend,
};
use super::state::{diff, SessionState, SimView};
use crate::error::{Error, Result};
use crate::geom::Pose;
use crate::kinematics::{settle, trace_csv, trace_svg, Runner, SolverConfig};
use crate::mechanism::{
    build_mechanisms, move_joint, rebind_after_sketch, trace_point, Driver, Mechanism,
    MechanismState, Scene, TrackedPoint,
};
use crate::recognition::{classify_gesture, extract_joint, recognize, RecognitionConfig};
use crate::sketch::{self, SketchDocument, Stroke, StrokeMode};
use crate::Id;
use std::collections::BTreeMap;

struct SimSlot {
    /// The scene instance this runner was assembled from.
    mech: Mechanism,
    runner: Runner,
    /// Trace samples already delivered to clients, per trace.
    sent: Vec<usize>,
}

impl SimSlot {
    fn view(&self) -> SimView {
        SimView {
            state: self.runner.state.clone(),
            traces: self.runner.traces.clone(),
            running: self.runner.is_running(),
            rates: self.runner.rates().to_vec(),
            dt: self.runner.dt(),
        }
    }

    fn mark_sent(&mut self) {
        self.sent = self.runner.traces.iter().map(|t| t.samples.len()).collect();
    }
}

/// One document with its build state and simulations. Commands are applied
/// strictly one at a time; every command that changes observable state bumps
/// the revision by one and yields a delta.
pub struct Session {
    pub id: String,
    doc: SketchDocument,
    sims: BTreeMap<Id, SimSlot>,
    revision: u64,
    saved_text: String,
    pub recognition: RecognitionConfig,
    pub solver: SolverConfig,
}

impl Session {
    pub fn new(id: impl Into<String>) -> Self {
        let doc = SketchDocument::new();
        Self {
            id: id.into(),
            saved_text: sketch::save(&doc),
            doc,
            sims: BTreeMap::new(),
            revision: 0,
            recognition: RecognitionConfig::default(),
            solver: SolverConfig::default(),
        }
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn document(&self) -> &SketchDocument {
        &self.doc
    }

    /// Whether the document differs from the last save or load.
    pub fn has_unsaved_changes(&self) -> bool {
        sketch::save(&self.doc) != self.saved_text
    }

    pub fn is_running(&self) -> bool {
        self.sims.values().any(|s| s.runner.is_running())
    }

    /// Smallest time step among running simulations.
    pub fn running_dt(&self) -> Option<f64> {
        self.sims
            .values()
            .filter(|s| s.runner.is_running())
            .map(|s| s.runner.dt())
            .fold(None, |m, dt| Some(m.map_or(dt, |m: f64| m.min(dt))))
    }

    /// Full observable state at the current revision.
    pub fn snapshot(&self) -> SessionState {
        SessionState {
            session: self.id.clone(),
            revision: self.revision,
            document: self.doc.content().clone(),
            sims: self.sims.iter().map(|(k, s)| (*k, s.view())).collect(),
        }
    }

    fn envelope(&self, seq: Option<u64>, event: Event) -> EventEnvelope {
        EventEnvelope {
            seq,
            session: Some(self.id.clone()),
            revision: self.revision,
            event,
        }
    }

    /// Apply one command and return the events it produced, in order.
    pub fn handle(&mut self, env: CommandEnvelope) -> Vec<EventEnvelope> {
        let seq = Some(env.seq);
        if let Some(base) = env.base_revision {
            if base != self.revision {
                return vec![self.envelope(
                    seq,
                    Event::Error {
                        code: "StaleRevision".into(),
                        message: format!(
                            "command based on revision {base}, session is at {}",
                            self.revision
                        ),
                    },
                )];
            }
        }
        let name = env.command.name();
        let before = self.snapshot();
        let result = self.execute(env.command);
        let after = self.snapshot();
        let changes = diff(&before, &after);
        for slot in self.sims.values_mut() {
            slot.mark_sent();
        }
        let mut out = Vec::new();
        if !changes.is_empty() {
            self.revision += 1;
            out.push(self.envelope(seq, Event::Delta { changes }));
        }
        match result {
            Ok(extra) => {
                if out.is_empty() && extra.is_empty() {
                    out.push(self.envelope(
                        seq,
                        Event::Unchanged {
                            command: name.to_string(),
                        },
                    ));
                }
                for e in extra {
                    let e = match e {
                        Event::Snapshot { .. } => Event::Snapshot {
                            state: Box::new(self.snapshot()),
                        },
                        other => other,
                    };
                    out.push(self.envelope(seq, e));
                }
            }
            Err(e) => out.push(self.envelope(
                seq,
                Event::Error {
                    code: e.code().into(),
                    message: e.to_string(),
                },
            )),
        }
        out
    }

    /// Advance every running simulation by up to `max_steps` steps and
    /// report progress, one event per instance that moved.
    pub fn advance(&mut self, max_steps: usize) -> Vec<EventEnvelope> {
        let mut events = Vec::new();
        for (&instance, slot) in self.sims.iter_mut() {
            if !slot.runner.is_running() {
                continue;
            }
            if slot.runner.advance(max_steps).is_empty() {
                continue;
            }
            let appended = slot
                .runner
                .traces
                .iter()
                .enumerate()
                .map(|(k, tr)| TraceAppend {
                    trace: k,
                    samples: tr.samples[slot.sent.get(k).copied().unwrap_or(0)..].to_vec(),
                    closed: tr.closed,
                })
                .collect();
            slot.mark_sent();
            events.push(Event::Sim {
                instance,
                state: slot.runner.state.clone(),
                running: slot.runner.is_running(),
                appended,
            });
        }
        events.into_iter().map(|e| self.envelope(None, e)).collect()
    }

    /// Stop every run at the current step boundary.
    pub fn pause_all(&mut self) {
        for s in self.sims.values_mut() {
            s.runner.pause();
        }
    }

    fn mechanism_state(&self) -> Result<MechanismState> {
        self.doc.content().mechanism.clone().ok_or_else(|| {
            Error::InvalidInput("nothing recognized yet; send recognize first".into())
        })
    }

    fn scene(&self) -> Result<&Scene> {
        self.doc
            .content()
            .mechanism
            .as_ref()
            .and_then(|m| m.scene.as_ref())
            .ok_or_else(|| Error::InvalidInput("no mechanism built; send build first".into()))
    }

    fn set_mechanism(&mut self, state: MechanismState) -> Result<()> {
        if self.doc.content().mechanism.as_ref() != Some(&state) {
            self.doc.set_mechanism(Some(state))?;
        }
        Ok(())
    }

    /// Drop simulations whose mechanism no longer matches the scene.
    fn reconcile(&mut self) {
        let scene = self
            .doc
            .content()
            .mechanism
            .as_ref()
            .and_then(|m| m.scene.clone());
        self.sims
            .retain(|id, slot| scene.as_ref().and_then(|s| s.instance(*id)) == Some(&slot.mech));
    }

    fn replace_instance(&mut self, mech: Mechanism) -> Result<()> {
        let mut state = self.mechanism_state()?;
        let scene = state
            .scene
            .as_mut()
            .ok_or_else(|| Error::InvalidInput("no mechanism built".into()))?;
        let slot = scene
            .instances
            .iter_mut()
            .find(|m| m.id == mech.id)
            .ok_or(Error::unknown("mechanism", mech.id))?;
        *slot = mech;
        self.set_mechanism(state)
    }

    fn resolve_instance(&self, instance: Option<Id>) -> Result<Id> {
        let scene = self.scene()?;
        match instance {
            Some(id) => scene
                .instance(id)
                .map(|m| m.id)
                .ok_or(Error::unknown("mechanism", id)),
            None => scene
                .instances
                .iter()
                .find(|m| m.driver_count() > 0)
                .or(scene.instances.first())
                .map(|m| m.id)
                .ok_or_else(|| Error::InvalidInput("scene has no mechanism".into())),
        }
    }

    fn slot(&mut self, instance: Id) -> Result<&mut SimSlot> {
        if !self.sims.contains_key(&instance) {
            let mech = self
                .scene()?
                .instance(instance)
                .cloned()
                .ok_or(Error::unknown("mechanism", instance))?;
            let runner = Runner::new(&mech, self.solver)?;
            let mut slot = SimSlot {
                mech,
                runner,
                sent: Vec::new(),
            };
            slot.mark_sent();
            self.sims.insert(instance, slot);
        }
        Ok(self.sims.get_mut(&instance).unwrap())
    }

    /// Current pose of every link of `instance`: from its simulation when
    /// one exists, otherwise the reference poses.
    fn current_poses(&self, instance: Id) -> Result<BTreeMap<Id, Pose>> {
        if let Some(slot) = self.sims.get(&instance) {
            return Ok(slot.runner.poses());
        }
        let m = self
            .scene()?
            .instance(instance)
            .ok_or(Error::unknown("mechanism", instance))?;
        Ok(m.reference_poses().into_iter().collect())
    }

    fn sync_drivers(state: &mut MechanismState) {
        let draft = &state.draft;
        if let Some(scene) = state.scene.as_mut() {
            for m in &mut scene.instances {
                for j in &mut m.joints {
                    j.driver = draft
                        .inputs
                        .get(&j.id)
                        .map(|&rate| Driver { joint: j.id, rate });
                    j.is_input = j.driver.is_some();
                }
            }
        }
    }

    fn execute(&mut self, cmd: Command) -> Result<Vec<Event>> {
        let mut extra = Vec::new();
        match cmd {
            Command::CreateSession {} => {
                return Err(Error::InvalidInput(
                    "create_session is not addressed to a session".into(),
                ))
            }
            Command::AddStroke { points, t, mode } => {
                self.doc.add_stroke_parts(points, t, mode)?;
            }
            Command::EraseStroke { stroke } => self.doc.erase_stroke(stroke)?,
            Command::Undo {} => {
                self.doc.undo();
            }
            Command::Redo {} => {
                self.doc.redo();
            }
            Command::SetUnderlay {
                image,
                position,
                scale,
                rotation,
            } => {
                self.doc.set_underlay(&image, position, scale, rotation)?;
            }
            Command::AttachDecoration { host, strokes } => {
                let strokes = strokes
                    .into_iter()
                    .map(|StrokeData { points, t }| (points, t))
                    .collect();
                self.doc.attach_decoration(host, strokes)?;
            }
            Command::Recognize { epsilon } => {
                let mut cfg = self.recognition;
                if let Some(e) = epsilon {
                    if !(e > 0.0 && e.is_finite()) {
                        return Err(Error::InvalidParameter(format!(
                            "epsilon must be > 0, got {e}"
                        )));
                    }
                    cfg.epsilon = Some(e);
                }
                let rec = recognize(self.doc.content(), &cfg);
                let mut scene_warnings = Vec::new();
                let state = match self.doc.content().mechanism.clone() {
                    Some(old) => {
                        let draft = old.draft.refresh(&rec);
                        let scene = old.scene.map(|s| {
                            let (scene, w) = rebind_after_sketch(&s, &rec.links);
                            scene_warnings = w;
                            scene
                        });
                        MechanismState { draft, scene }
                    }
                    None => MechanismState::from_recognition(&rec),
                };
                self.set_mechanism(state)?;
                extra.push(Event::Recognized {
                    links: rec.links,
                    joints: rec.joints,
                    warnings: rec.warnings,
                    scene_warnings,
                });
            }
            Command::MarkGround { link } => {
                let mut state = self.mechanism_state()?;
                let was = state.draft.ground.clone();
                let marker = state.draft.mark_ground(link)?;
                if state.draft.ground != was {
                    // frames hang off the ground; the scene must be rebuilt
                    state.scene = None;
                }
                self.set_mechanism(state)?;
                extra.push(Event::Marker { marker });
            }
            Command::AddJointGesture { points, t } => {
                let state = self.mechanism_state()?;
                let cfg = self.recognition;
                let joint = self.doc.edit(|c| {
                    let id = c.fresh_id();
                    let stroke = Stroke::new(id, StrokeMode::Gesture, points, t)?;
                    c.strokes.push(stroke);
                    let stroke = c.stroke(id).unwrap();
                    let class = classify_gesture(stroke, &cfg.thresholds)?;
                    let joint =
                        extract_joint(&class, stroke, &state.draft.links, c, cfg.epsilon_for(c))?;
                    let mut state = state;
                    state.draft.joints.push(joint.clone());
                    c.mechanism = Some(state);
                    Ok(joint)
                })?;
                extra.push(Event::JointAdded { joint });
            }
            Command::SelectInput { joint } => {
                let mut state = self.mechanism_state()?;
                let marker = state.draft.select_input(joint)?;
                Self::sync_drivers(&mut state);
                self.set_mechanism(state)?;
                extra.push(Event::Marker { marker });
            }
            Command::DeselectInput { joint } => {
                let mut state = self.mechanism_state()?;
                let marker = state.draft.deselect_input(joint)?;
                Self::sync_drivers(&mut state);
                self.set_mechanism(state)?;
                extra.push(Event::Marker { marker });
            }
            Command::SetDriver { joint, rate } => {
                let mut state = self.mechanism_state()?;
                let marker = state.draft.set_driver(joint, rate)?;
                Self::sync_drivers(&mut state);
                self.set_mechanism(state)?;
                if let Some(marker) = marker {
                    extra.push(Event::Marker { marker });
                }
            }
            Command::Build {} => {
                let mut state = self.mechanism_state()?;
                state.scene = Some(build_mechanisms(
                    &state.draft,
                    self.doc.content().scene_diagonal(),
                ));
                self.set_mechanism(state)?;
            }
            Command::Run {
                instance,
                rates,
                dt,
                duration,
                cycles,
            } => {
                let id = self.resolve_instance(instance)?;
                let slot = self.slot(id)?;
                if let Some(r) = rates {
                    slot.runner.set_rates(r)?;
                }
                let dt = dt.unwrap_or_else(|| slot.runner.default_dt());
                if !(dt > 0.0 && dt.is_finite()) {
                    return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
                }
                let steps = match (duration, cycles) {
                    (Some(_), Some(_)) => {
                        return Err(Error::InvalidParameter(
                            "give either duration or cycles, not both".into(),
                        ))
                    }
                    (Some(d), None) if d >= 0.0 => Some((d / dt).round() as u64),
                    (Some(d), None) => {
                        return Err(Error::InvalidParameter(format!(
                            "duration must be >= 0, got {d}"
                        )))
                    }
                    (None, Some(c)) => Some(slot.runner.steps_for_cycles(c, dt)?),
                    (None, None) => None,
                };
                slot.runner.start(dt, steps)?;
            }
            Command::Pause { instance } => {
                for (id, s) in self.sims.iter_mut() {
                    if instance.is_none_or(|i| i == *id) {
                        s.runner.pause();
                    }
                }
            }
            Command::Scrub { instance, target } => {
                let id = self.resolve_instance(instance)?;
                self.slot(id)?.runner.scrub(&target)?;
            }
            Command::MoveJoint { joint, to, side } => {
                let mech = self
                    .scene()?
                    .instance_of_joint(joint)
                    .cloned()
                    .ok_or(Error::unknown("joint", joint))?;
                let poses = self.current_poses(mech.id)?;
                let moved = settle(&move_joint(&mech, &poses, joint, to, side)?)?;
                self.replace_instance(moved)?;
            }
            Command::TracePoint { link, point } => {
                let mech = self
                    .scene()?
                    .instance_of_link(link)
                    .cloned()
                    .ok_or(Error::unknown("link", link))?;
                let pose = self.current_poses(mech.id)?[&link];
                let local = pose.inverse_apply(point);
                let updated = trace_point(&mech, link, local)?;
                self.replace_instance(updated.clone())?;
                if let Some(slot) = self.sims.get_mut(&mech.id) {
                    slot.mech = updated;
                    slot.runner.add_tracked(TrackedPoint { link, local });
                }
            }
            Command::ClearTrace { instance } => {
                for (id, s) in self.sims.iter_mut() {
                    if instance.is_none_or(|i| i == *id) {
                        s.runner.reset_traces();
                    }
                }
            }
            Command::Save { path } => {
                let text = sketch::save(&self.doc);
                if let Some(p) = path {
                    std::fs::write(&p, &text)?;
                }
                self.saved_text = text.clone();
                extra.push(Event::Saved { text });
            }
            Command::Load { text } => {
                self.doc = sketch::load(text.as_bytes())?;
                self.sims.clear();
                self.saved_text = sketch::save(&self.doc);
            }
            Command::ExportTrace { instance, format } => {
                let id = self.resolve_instance(instance)?;
                let slot = self.sims.get(&id).ok_or_else(|| {
                    Error::InvalidInput(format!("mechanism {id} has not been simulated"))
                })?;
                let text = match format {
                    ExportFormat::Csv => trace_csv(&slot.runner.traces),
                    ExportFormat::Svg => trace_svg(&[&slot.mech], &slot.runner.traces),
                };
                extra.push(Event::Exported { format, text });
            }
            Command::Snapshot {} => extra.push(Event::Snapshot {
                state: Box::default(),
            }),
        }
        self.reconcile();
        Ok(extra)
    }
}

/// All sessions of one server, keyed by session id.
#[derive(Default)]
pub struct Registry {
    sessions: BTreeMap<String, Session>,
    counter: u64,
    pub recognition: RecognitionConfig,
    pub solver: SolverConfig,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn session(&self, id: &str) -> Option<&Session> {
        self.sessions.get(id)
    }

    pub fn session_mut(&mut self, id: &str) -> Option<&mut Session> {
        self.sessions.get_mut(id)
    }

    pub fn sessions(&self) -> impl Iterator<Item = &Session> {
        self.sessions.values()
    }

    pub fn sessions_mut(&mut self) -> impl Iterator<Item = &mut Session> {
        self.sessions.values_mut()
    }

    /// Parse and apply one text message.
    pub fn handle_text(&mut self, text: &str) -> Vec<EventEnvelope> {
        match serde_json::from_str::<CommandEnvelope>(text) {
            Ok(env) => self.handle(env),
            Err(e) => {
                let raw: Option<serde_json::Value> = serde_json::from_str(text).ok();
                let seq = raw
                    .as_ref()
                    .and_then(|v| v.get("seq"))
                    .and_then(|s| s.as_u64());
                vec![EventEnvelope::error(
                    seq,
                    None,
                    0,
                    "BadEnvelope",
                    e.to_string(),
                )]
            }
        }
    }

    pub fn handle(&mut self, env: CommandEnvelope) -> Vec<EventEnvelope> {
        if matches!(env.command, Command::CreateSession {}) {
            self.counter += 1;
            let id = format!("s{}", self.counter);
            let mut s = Session::new(id.clone());
            s.recognition = self.recognition;
            s.solver = self.solver;
            self.sessions.insert(id.clone(), s);
            return vec![EventEnvelope {
                seq: Some(env.seq),
                session: Some(id),
                revision: 0,
                event: Event::SessionCreated,
            }];
        }
        let Some(id) = env.session.clone() else {
            return vec![EventEnvelope::error(
                Some(env.seq),
                None,
                0,
                "BadEnvelope",
                "missing session id",
            )];
        };
        match self.sessions.get_mut(&id) {
            Some(s) => s.handle(env),
            None => vec![EventEnvelope::error(
                Some(env.seq),
                Some(id.clone()),
                0,
                "UnknownSession",
                format!("no session {id}"),
            )],
        }
    }
}
