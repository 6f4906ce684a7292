//! Wire messages. Every message is one JSON object in one WebSocket text
//! frame. See `docs/protocol.md` for the field-by-field reference.

use super::state::{Change, SessionState};
use crate::geom::Point2;
use crate::kinematics::{SimState, TraceSample};
use crate::mechanism::{JointSide, SceneWarning};
use crate::recognition::{GestureWarning, JointHypothesis, LinkHypothesis, MarkerEvent};
use crate::sketch::StrokeMode;
use crate::Id;
use serde::{Deserialize, Serialize};

/// Points and timestamps of one stroke.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrokeData {
    pub points: Vec<Point2>,
    pub t: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Csv,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Command {
    CreateSession {},
    AddStroke {
        points: Vec<Point2>,
        t: Vec<f64>,
        mode: StrokeMode,
    },
    EraseStroke {
        stroke: Id,
    },
    Undo {},
    Redo {},
    SetUnderlay {
        image: String,
        position: Point2,
        scale: f64,
        #[serde(default)]
        rotation: f64,
    },
    AttachDecoration {
        host: Id,
        strokes: Vec<StrokeData>,
    },
    Recognize {
        #[serde(default)]
        epsilon: Option<f64>,
    },
    MarkGround {
        link: Id,
    },
    AddJointGesture {
        points: Vec<Point2>,
        t: Vec<f64>,
    },
    SelectInput {
        joint: Id,
    },
    DeselectInput {
        joint: Id,
    },
    SetDriver {
        joint: Id,
        rate: f64,
    },
    Build {},
    Run {
        #[serde(default)]
        instance: Option<Id>,
        /// Driver rates overriding the built ones, in driver order.
        #[serde(default)]
        rates: Option<Vec<f64>>,
        #[serde(default)]
        dt: Option<f64>,
        #[serde(default)]
        duration: Option<f64>,
        #[serde(default)]
        cycles: Option<f64>,
    },
    Pause {
        #[serde(default)]
        instance: Option<Id>,
    },
    Scrub {
        #[serde(default)]
        instance: Option<Id>,
        target: Vec<f64>,
    },
    MoveJoint {
        joint: Id,
        to: Point2,
        side: JointSide,
    },
    TracePoint {
        link: Id,
        /// World position at the current pose.
        point: Point2,
    },
    ClearTrace {
        #[serde(default)]
        instance: Option<Id>,
    },
    Save {
        #[serde(default)]
        path: Option<String>,
    },
    Load {
        text: String,
    },
    ExportTrace {
        #[serde(default)]
        instance: Option<Id>,
        format: ExportFormat,
    },
    Snapshot {},
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::CreateSession {} => "create_session",
            Command::AddStroke { .. } => "add_stroke",
            Command::EraseStroke { .. } => "erase_stroke",
            Command::Undo {} => "undo",
            Command::Redo {} => "redo",
            Command::SetUnderlay { .. } => "set_underlay",
            Command::AttachDecoration { .. } => "attach_decoration",
            Command::Recognize { .. } => "recognize",
            Command::MarkGround { .. } => "mark_ground",
            Command::AddJointGesture { .. } => "add_joint_gesture",
            Command::SelectInput { .. } => "select_input",
            Command::DeselectInput { .. } => "deselect_input",
            Command::SetDriver { .. } => "set_driver",
            Command::Build {} => "build",
            Command::Run { .. } => "run",
            Command::Pause { .. } => "pause",
            Command::Scrub { .. } => "scrub",
            Command::MoveJoint { .. } => "move_joint",
            Command::TracePoint { .. } => "trace_point",
            Command::ClearTrace { .. } => "clear_trace",
            Command::Save { .. } => "save",
            Command::Load { .. } => "load",
            Command::ExportTrace { .. } => "export_trace",
            Command::Snapshot {} => "snapshot",
        }
    }
}

/// Client to server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandEnvelope {
    pub seq: u64,
    /// Required for everything except `create_session`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session: Option<String>,
    /// When present, the command is refused with `StaleRevision` unless it
    /// equals the session's current revision.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_revision: Option<u64>,
    pub command: Command,
}

/// Samples appended to one trace by a simulation event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceAppend {
    pub trace: usize,
    pub samples: Vec<TraceSample>,
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    SessionCreated,
    /// State change caused by a mutating command.
    Delta {
        changes: Vec<Change>,
    },
    /// A command that did not change anything (e.g. undo on empty history).
    Unchanged {
        command: String,
    },
    Recognized {
        links: Vec<LinkHypothesis>,
        joints: Vec<JointHypothesis>,
        warnings: Vec<GestureWarning>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        scene_warnings: Vec<SceneWarning>,
    },
    JointAdded {
        joint: JointHypothesis,
    },
    Marker {
        marker: MarkerEvent,
    },
    /// Progress of a run; carries the revision current when it was sent.
    Sim {
        instance: Id,
        state: SimState,
        running: bool,
        appended: Vec<TraceAppend>,
    },
    Snapshot {
        state: Box<SessionState>,
    },
    Saved {
        text: String,
    },
    Exported {
        format: ExportFormat,
        text: String,
    },
    Error {
        code: String,
        message: String,
    },
}

/// Server to client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventEnvelope {
    /// `seq` of the command that produced this event; absent for
    /// simulation progress and for unparseable input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seq: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session: Option<String>,
    pub revision: u64,
    pub event: Event,
}

impl EventEnvelope {
    pub fn error(
        seq: Option<u64>,
        session: Option<String>,
        revision: u64,
        code: &str,
        message: impl Into<String>,
    ) -> Self {
        Self {
            seq,
            session,
            revision,
            event: Event::Error {
                code: code.to_string(),
                message: message.into(),
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("events serialize")
    }
}
