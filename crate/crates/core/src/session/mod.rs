//! Session service: documents, build state and simulations behind a JSON
//! command/event protocol, served over WebSocket by [`server::serve`].

mod config;
mod protocol;
pub mod server;
#[allow(clippy::module_inception)]
mod session;
mod state;

pub use config::ServiceConfig;
pub use protocol::{
    Command, CommandEnvelope, Event, EventEnvelope, ExportFormat, StrokeData, TraceAppend,
};
pub use session::{Registry, Session};
pub use state::{apply, diff, Change, Replica, SessionState, SimView};
