//! Position-level kinematics: constraint assembly, Newton stepping with
//! branch continuation, lock and singularity detection, traces of tracked
//! points and their CSV/SVG export.

mod export;
mod solver;
mod system;
mod trace;

pub use export::{trace_csv, trace_svg};
pub use solver::{settle, solve_step, RunOutcome, Runner, SolverConfig};
pub use system::{ConstraintSystem, DriverEq};
pub use trace::{Trace, TraceSample};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimStatus {
    Ok,
    /// Converged, but the Jacobian condition estimate exceeds the limit.
    Singular,
    /// The driven coordinate cannot be reached; `blocked_at` holds the limit.
    Locked,
    Diverged,
}

/// Solver state after a step. `q` always holds a valid assembly: on a
/// failed step it is the last pose that converged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub t: f64,
    /// (x, y, theta) per non-ground link, ordered by link id.
    pub q: Vec<f64>,
    /// Driver coordinates at `q`, in driver order.
    pub drive: Vec<f64>,
    pub status: SimStatus,
    pub iterations: usize,
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocked_at: Option<Vec<f64>>,
}

impl SimState {
    pub fn is_ok(&self) -> bool {
        self.status == SimStatus::Ok
    }
}
