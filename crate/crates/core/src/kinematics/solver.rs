use super::system::ConstraintSystem;
use super::trace::Trace;
use super::{SimState, SimStatus};
use crate::error::{Error, Result};
use crate::geom::wrap_angle;
use crate::mechanism::Mechanism;
use crate::recognition::JointKind;
use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub max_iterations: usize,
    pub max_halvings: u32,
    /// Condition number above which a converged pose is reported Singular.
    pub singular_condition: f64,
    /// Width, in driver units, to which a lock limit is bracketed.
    pub limit_tolerance: f64,
    /// A failed step counts as Locked when its best residual stayed below
    /// this fraction of the scene diagonal; above it the step Diverged.
    pub lock_residual_fraction: f64,
    /// Use the tangent predictor before falling back to a plain warm start.
    pub predictor: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            max_halvings: 8,
            singular_condition: 1e12,
            limit_tolerance: 1e-10,
            lock_residual_fraction: 0.1,
            predictor: true,
        }
    }
}

/// Newton gives up after this many iterations without a new best residual.
const STALL_ITERATIONS: usize = 6;

enum Attempt {
    Converged {
        q: DVector<f64>,
        iterations: usize,
        residual: f64,
    },
    Failed {
        best_residual: f64,
        iterations: usize,
    },
}

fn newton(sys: &ConstraintSystem, q0: DVector<f64>, drive: &[f64], cfg: &SolverConfig) -> Attempt {
    let tol = sys.tolerance();
    let mut q = q0;
    let mut best = f64::INFINITY;
    let mut since_best = 0;
    for it in 0..=cfg.max_iterations {
        let f = sys.residual(&q, drive);
        let r = f.norm();
        if !r.is_finite() {
            break;
        }
        if r < best {
            best = r;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= STALL_ITERATIONS {
                return Attempt::Failed {
                    best_residual: best,
                    iterations: it,
                };
            }
        }
        if r <= tol {
            // one more step costs little and lands near round-off
            if let Some(dq) = sys.jacobian(&q).lu().solve(&(-f)) {
                let polished = &q + dq;
                let r2 = sys.residual(&polished, drive).norm();
                if r2 < r {
                    return Attempt::Converged {
                        q: polished,
                        iterations: it + 1,
                        residual: r2,
                    };
                }
            }
            return Attempt::Converged {
                q,
                iterations: it,
                residual: r,
            };
        }
        if it == cfg.max_iterations {
            break;
        }
        match sys.jacobian(&q).lu().solve(&(-f)) {
            Some(dq) if dq.iter().all(|v| v.is_finite()) => q += dq,
            _ => break,
        }
    }
    Attempt::Failed {
        best_residual: best,
        iterations: cfg.max_iterations,
    }
}

/// First-order prediction along the solution curve: solve J dq = e ds where
/// only driver rows of e are nonzero.
fn predict(
    sys: &ConstraintSystem,
    q: &DVector<f64>,
    from: &[f64],
    to: &[f64],
) -> Option<DVector<f64>> {
    let nj = sys.equation_count() - sys.drivers.len();
    let mut rhs = DVector::zeros(sys.equation_count());
    for k in 0..from.len() {
        rhs[nj + k] = to[k] - from[k];
    }
    let dq = sys.jacobian(q).lu().solve(&rhs)?;
    let bound = 0.5 * sys.scene_diagonal;
    (dq.iter().all(|v| v.is_finite()) && dq.norm() <= bound).then(|| q + dq)
}

/// Newton can wind a link through whole turns on its way to a solution.
/// Bring each link angle back within half a turn of `prev` wherever that
/// keeps the pose converged (angle-locked and driven links keep theirs).
fn unwind(
    sys: &ConstraintSystem,
    prev: &DVector<f64>,
    mut q: DVector<f64>,
    drive: &[f64],
) -> DVector<f64> {
    let tol = sys.tolerance();
    for k in 0..sys.free_links.len() {
        let i = 3 * k + 2;
        let turns = ((prev[i] - q[i]) / TAU).round();
        if turns == 0.0 {
            continue;
        }
        let mut shifted = q.clone();
        shifted[i] += turns * TAU;
        if sys.residual(&shifted, drive).norm() <= tol {
            q = shifted;
        }
    }
    q
}

fn attempt(
    sys: &ConstraintSystem,
    q: &DVector<f64>,
    from: &[f64],
    to: &[f64],
    cfg: &SolverConfig,
) -> Attempt {
    let mut spent = 0;
    let mut result = None;
    if cfg.predictor {
        if let Some(guess) = predict(sys, q, from, to) {
            match newton(sys, guess, to, cfg) {
                done @ Attempt::Converged { .. } => result = Some(done),
                Attempt::Failed { iterations, .. } => spent = iterations,
            }
        }
    }
    let result = result.unwrap_or_else(|| match newton(sys, q.clone(), to, cfg) {
        Attempt::Converged {
            q,
            iterations,
            residual,
        } => Attempt::Converged {
            q,
            iterations: iterations + spent,
            residual,
        },
        Attempt::Failed {
            best_residual,
            iterations,
        } => Attempt::Failed {
            best_residual,
            iterations: iterations + spent,
        },
    });
    match result {
        Attempt::Converged {
            q: qn, iterations, ..
        } => {
            let qn = unwind(sys, q, qn, to);
            let residual = sys.residual(&qn, to).norm();
            Attempt::Converged {
                q: qn,
                iterations,
                residual,
            }
        }
        failed => failed,
    }
}

fn lerp(a: &[f64], b: &[f64], f: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + (y - x) * f).collect()
}

fn condition(sys: &ConstraintSystem, q: &DVector<f64>) -> f64 {
    let sv = sys.jacobian(q).singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Advance from `state` to the driver coordinates `target` at time `t_next`.
///
/// The step is retried with halved increments up to `max_halvings` times.
/// A step that still fails with a small best residual is Locked, and the
/// limit is bracketed by bisection to `limit_tolerance`; otherwise the step
/// Diverged. The returned `q` is the last converged pose either way.
pub fn solve_step(
    sys: &ConstraintSystem,
    state: &SimState,
    target: &[f64],
    t_next: f64,
    cfg: &SolverConfig,
) -> SimState {
    let start = state.drive.clone();
    let mut q = DVector::from_column_slice(&state.q);
    let mut s = start.clone();
    let mut done = 0.0_f64;
    let mut h = 1.0_f64;
    let mut halvings = 0;
    let mut iterations = 0;
    let time_at = |f: f64| state.t + (t_next - state.t) * f;

    while done < 1.0 {
        let next = (done + h).min(1.0);
        let s_next = if next == 1.0 {
            target.to_vec()
        } else {
            lerp(&start, target, next)
        };
        match attempt(sys, &q, &s, &s_next, cfg) {
            Attempt::Converged {
                q: qn,
                iterations: it,
                ..
            } => {
                iterations += it;
                q = qn;
                s = s_next;
                done = next;
            }
            Attempt::Failed {
                best_residual,
                iterations: it,
            } => {
                iterations += it;
                if halvings < cfg.max_halvings {
                    h *= 0.5;
                    halvings += 1;
                    continue;
                }
                let locked = best_residual <= cfg.lock_residual_fraction * sys.scene_diagonal;
                if !locked {
                    return finish(
                        sys,
                        q,
                        s,
                        time_at(done),
                        SimStatus::Diverged,
                        iterations,
                        None,
                    );
                }
                let span = start
                    .iter()
                    .zip(target)
                    .map(|(a, b)| (b - a).abs())
                    .fold(0.0, f64::max);
                let (mut lo, mut hi) = (done, next);
                while (hi - lo) * span > cfg.limit_tolerance {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    let s_mid = lerp(&start, target, mid);
                    match attempt(sys, &q, &s, &s_mid, cfg) {
                        Attempt::Converged {
                            q: qn,
                            iterations: it,
                            ..
                        } => {
                            iterations += it;
                            q = qn;
                            s = s_mid;
                            lo = mid;
                        }
                        Attempt::Failed { iterations: it, .. } => {
                            iterations += it;
                            hi = mid;
                        }
                    }
                }
                let limit = s.clone();
                return finish(
                    sys,
                    q,
                    s,
                    time_at(lo),
                    SimStatus::Locked,
                    iterations,
                    Some(limit),
                );
            }
        }
    }
    let status = if condition(sys, &q) > cfg.singular_condition {
        SimStatus::Singular
    } else {
        SimStatus::Ok
    };
    finish(sys, q, s, t_next, status, iterations, None)
}

fn finish(
    sys: &ConstraintSystem,
    q: DVector<f64>,
    drive: Vec<f64>,
    t: f64,
    status: SimStatus,
    iterations: usize,
    blocked_at: Option<Vec<f64>>,
) -> SimState {
    let residual = sys.residual(&q, &drive).norm();
    SimState {
        t,
        q: q.as_slice().to_vec(),
        drive,
        status,
        iterations,
        residual,
        blocked_at,
    }
}

/// Re-assemble a mechanism whose reference poses no longer satisfy its
/// joints (after [`crate::mechanism::move_joint`]). Driver coordinates are
/// held at their current values and the smallest pose change is sought by
/// Gauss-Newton with a pseudo-inverse. Reference poses are replaced by the
/// result.
pub fn settle(mech: &Mechanism) -> Result<Mechanism> {
    let sys = match ConstraintSystem::assemble_unchecked(mech) {
        Ok(s) => s,
        Err(Error::NoGround(_)) => ConstraintSystem::assemble_floating(mech)?,
        Err(e) => return Err(e),
    };
    let mut q = sys.reference_q(mech);
    let drive = sys.driver_coordinates(&q);
    let tol = sys.tolerance();
    let mut residual = sys.residual(&q, &drive).norm();
    for _ in 0..SolverConfig::default().max_iterations {
        if residual <= tol {
            break;
        }
        let f = sys.residual(&q, &drive);
        let svd = sys.jacobian(&q).svd(true, true);
        let Ok(dq) = svd.solve(&(-f), 1e-12) else {
            break;
        };
        q += dq;
        residual = sys.residual(&q, &drive).norm();
        if !residual.is_finite() {
            break;
        }
    }
    if residual > tol || !residual.is_finite() {
        return Err(Error::AssemblyFailed { residual });
    }
    let mut out = mech.clone();
    for l in &mut out.links {
        if let Some(mut p) = sys.link_pose(l.id, &q) {
            p.theta = wrap_angle(p.theta);
            l.reference_pose = p;
        }
    }
    Ok(out)
}

/// Result of a bounded run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub states: Vec<SimState>,
    pub final_state: SimState,
}

/// Fixed-step driver of one mechanism instance. Holds the current state,
/// driver rates and the traces of the mechanism's tracked points.
#[derive(Debug, Clone)]
pub struct Runner {
    pub system: ConstraintSystem,
    pub state: SimState,
    pub traces: Vec<Trace>,
    pub config: SolverConfig,
    rates: Vec<f64>,
    dt: f64,
    base_t: f64,
    base_drive: Vec<f64>,
    step_index: u64,
    remaining: Option<u64>,
    trace_origin: Vec<f64>,
}

impl Runner {
    /// Assemble `mech` and start at its reference pose with t = 0. Every
    /// tracked point gets a trace seeded with its initial position.
    pub fn new(mech: &Mechanism, config: SolverConfig) -> Result<Runner> {
        let system = ConstraintSystem::assemble(mech)?;
        let q = system.reference_q(mech);
        let drive = system.driver_coordinates(&q);
        let residual = system.residual(&q, &drive).norm();
        if residual > system.tolerance() {
            return Err(Error::AssemblyFailed { residual });
        }
        let state = SimState {
            t: 0.0,
            q: q.as_slice().to_vec(),
            drive: drive.clone(),
            status: SimStatus::Ok,
            iterations: 0,
            residual,
            blocked_at: None,
        };
        let rates = system.drivers.iter().map(|d| d.rate).collect();
        let mut runner = Runner {
            traces: Vec::new(),
            config,
            rates,
            dt: 0.0,
            base_t: 0.0,
            base_drive: drive.clone(),
            step_index: 0,
            remaining: Some(0),
            trace_origin: drive,
            state,
            system,
        };
        runner.dt = runner.default_dt();
        runner.reset_traces();
        Ok(runner)
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Replace the driver rates (in driver order).
    pub fn set_rates(&mut self, rates: Vec<f64>) -> Result<()> {
        if rates.len() != self.rates.len() || rates.iter().any(|r| !r.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "expected {} finite driver rates",
                self.rates.len()
            )));
        }
        self.rates = rates;
        self.rebase();
        Ok(())
    }

    /// 1 degree of motion per step for the first revolute driver, otherwise
    /// 1% of the scene diagonal per step.
    pub fn default_dt(&self) -> f64 {
        let pick = self
            .system
            .drivers
            .iter()
            .zip(&self.rates)
            .find(|(d, r)| d.kind == JointKind::Revolute && **r != 0.0)
            .map(|(_, r)| (PI / 180.0) / r.abs());
        pick.or_else(|| {
            self.rates
                .iter()
                .find(|r| **r != 0.0)
                .map(|r| 0.01 * self.system.scene_diagonal / r.abs())
        })
        .unwrap_or(1.0 / 60.0)
    }

    /// Number of steps of length `dt` that turn the first revolute input
    /// through `cycles` full turns.
    pub fn steps_for_cycles(&self, cycles: f64, dt: f64) -> Result<u64> {
        let rate = self
            .system
            .drivers
            .iter()
            .zip(&self.rates)
            .find(|(d, r)| d.kind == JointKind::Revolute && **r != 0.0)
            .map(|(_, r)| r.abs())
            .ok_or_else(|| {
                Error::InvalidParameter("cycles need a turning revolute input".into())
            })?;
        Ok((cycles * TAU / (rate * dt)).round() as u64)
    }

    /// Arm a run of `steps` fixed steps of length `dt` (unbounded if None).
    pub fn start(&mut self, dt: f64, steps: Option<u64>) -> Result<()> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter("dt must be positive".into()));
        }
        self.dt = dt;
        self.remaining = steps;
        self.state.status = SimStatus::Ok;
        self.state.blocked_at = None;
        self.rebase();
        Ok(())
    }

    fn rebase(&mut self) {
        self.base_t = self.state.t;
        self.base_drive = self.state.drive.clone();
        self.step_index = 0;
    }

    /// Stop the armed run after the current step.
    pub fn pause(&mut self) {
        self.remaining = Some(0);
    }

    pub fn is_running(&self) -> bool {
        self.state.is_ok() && self.remaining != Some(0)
    }

    /// Take one step; returns None when no run is armed or the last step
    /// halted.
    pub fn step(&mut self) -> Option<SimState> {
        if !self.is_running() {
            return None;
        }
        self.step_index += 1;
        let elapsed = self.step_index as f64 * self.dt;
        let target: Vec<f64> = self
            .base_drive
            .iter()
            .zip(&self.rates)
            .map(|(s, r)| s + r * elapsed)
            .collect();
        let next = solve_step(
            &self.system,
            &self.state,
            &target,
            self.base_t + elapsed,
            &self.config,
        );
        self.accept(next.clone());
        if let Some(n) = self.remaining.as_mut() {
            *n = n.saturating_sub(1);
        }
        Some(next)
    }

    fn accept(&mut self, next: SimState) {
        if next.is_ok() {
            let q = DVector::from_column_slice(&next.q);
            for tr in &mut self.traces {
                if let Some(p) = self.system.world_point(tr.point.link, tr.point.local, &q) {
                    tr.push(next.t, p);
                }
            }
            let full_turn = self.system.drivers.iter().enumerate().any(|(k, d)| {
                d.kind == JointKind::Revolute
                    && (next.drive[k] - self.trace_origin[k]).abs() >= TAU - 1e-9
            });
            if full_turn {
                for tr in &mut self.traces {
                    tr.closed = true;
                }
            }
        }
        self.state = next;
    }

    /// Take up to `max_steps` steps of the armed run.
    pub fn advance(&mut self, max_steps: usize) -> Vec<SimState> {
        let mut out = Vec::new();
        while out.len() < max_steps {
            match self.step() {
                Some(s) => out.push(s),
                None => break,
            }
        }
        out
    }

    /// Run `steps` fixed steps of `dt` to completion or halt.
    pub fn run(&mut self, dt: f64, steps: u64) -> Result<RunOutcome> {
        self.start(dt, Some(steps))?;
        let states = self.advance(usize::MAX);
        Ok(RunOutcome {
            final_state: self.state.clone(),
            states,
        })
    }

    /// Move the drivers to `target` in sub-steps of at most 5 degrees
    /// (revolute) or 5% of the travel (prismatic). Time does not advance;
    /// trace samples carry the current time.
    pub fn scrub(&mut self, target: &[f64]) -> Result<Vec<SimState>> {
        if target.len() != self.rates.len() || target.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "expected {} finite driver targets",
                self.rates.len()
            )));
        }
        self.remaining = Some(0);
        self.state.status = SimStatus::Ok;
        self.state.blocked_at = None;
        let from = self.state.drive.clone();
        let mut n = 1usize;
        for (k, d) in self.system.drivers.iter().enumerate() {
            let travel = (target[k] - from[k]).abs();
            let m = match d.kind {
                JointKind::Revolute => (travel / 5f64.to_radians()).ceil() as usize,
                JointKind::Prismatic if travel > 0.0 => 20,
                JointKind::Prismatic => 0,
            };
            n = n.max(m);
        }
        if from.as_slice() == target {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        for i in 1..=n {
            let s = if i == n {
                target.to_vec()
            } else {
                lerp(&from, target, i as f64 / n as f64)
            };
            let next = solve_step(&self.system, &self.state, &s, self.state.t, &self.config);
            let ok = next.is_ok();
            self.accept(next.clone());
            out.push(next);
            if !ok {
                break;
            }
        }
        self.rebase();
        Ok(out)
    }

    /// Start tracing another point from the current pose on.
    pub fn add_tracked(&mut self, point: crate::mechanism::TrackedPoint) {
        let q = DVector::from_column_slice(&self.state.q);
        let mut tr = Trace::new(point);
        if let Some(p) = self.system.world_point(point.link, point.local, &q) {
            tr.push(self.state.t, p);
        }
        self.system.tracked.push(point);
        self.traces.push(tr);
    }

    /// Drop all trace samples and restart them at the current pose.
    pub fn reset_traces(&mut self) {
        let q = DVector::from_column_slice(&self.state.q);
        self.trace_origin = self.state.drive.clone();
        self.traces = self
            .system
            .tracked
            .iter()
            .map(|tp| {
                let mut tr = Trace::new(*tp);
                if let Some(p) = self.system.world_point(tp.link, tp.local, &q) {
                    tr.push(self.state.t, p);
                }
                tr
            })
            .collect();
    }

    /// Independently re-evaluated joint residual at the current state.
    pub fn joint_residual(&self) -> f64 {
        self.system
            .joint_residual(&DVector::from_column_slice(&self.state.q))
            .norm()
    }

    pub fn poses(&self) -> std::collections::BTreeMap<crate::Id, crate::Pose> {
        self.system
            .poses(&DVector::from_column_slice(&self.state.q))
    }
}
