//! Headless front door: `simulate`, `recognize` and `serve`.
//!
//! [`main_with`] takes its arguments and output streams explicitly so the
//! binary stays a one-liner and tests can drive the commands in-process.
//! Exit codes: 0 success, 1 any error (one `error:` line on stderr),
//! 2 a simulation halted Locked, Singular or Diverged.

use crate::error::{Error, Result};
use crate::kinematics::{trace_csv, trace_svg, Runner, SimStatus, SolverConfig, Trace};
use crate::mechanism::{
    build_mechanisms, classify_four_bar, FourBarClass, Mechanism, MechanismState,
};
use crate::recognition::{recognize, JointKind, RecognitionConfig};
use crate::session::server::Server;
use crate::session::ServiceConfig;
use crate::sketch::{self, SketchDocument};
use crate::Id;
use clap::{Args, Parser, Subcommand};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

#[derive(Debug, Parser)]
#[command(
    name = "sketchmech",
    version,
    about = "Sketch-based planar mechanism workbench"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Simulate every built mechanism in a `.mech.json` file.
    Simulate(SimulateArgs),
    /// Print the link and joint hypotheses recognized in a sketch.
    Recognize { file: PathBuf },
    /// Run the WebSocket session service until interrupted.
    Serve {
        /// Service configuration file (JSON).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the listen address, e.g. 127.0.0.1:9000.
        #[arg(long)]
        listen: Option<String>,
    },
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub file: PathBuf,
    /// Time step in seconds (default: 1 degree of input rotation).
    #[arg(long)]
    pub dt: Option<f64>,
    /// Number of input revolutions (default 1).
    #[arg(long, conflicts_with = "duration")]
    pub cycles: Option<f64>,
    /// Simulated time in seconds.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Override an input's rate, e.g. `--driver 7=-1.5`. Repeatable.
    #[arg(long = "driver", value_name = "JOINT=RATE", value_parser = parse_driver)]
    pub drivers: Vec<(Id, f64)>,
    /// Write traces as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Write traces over the skeleton as SVG.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Solver settings file (JSON, same fields as the service's `solver`).
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn parse_driver(s: &str) -> std::result::Result<(Id, f64), String> {
    let (joint, rate) = s
        .split_once('=')
        .ok_or_else(|| format!("expected JOINT=RATE, got {s:?}"))?;
    let joint: u64 = joint
        .trim()
        .trim_start_matches('#')
        .parse()
        .map_err(|_| format!("bad joint id {joint:?}"))?;
    let rate: f64 = rate
        .trim()
        .parse()
        .map_err(|_| format!("bad rate {rate:?}"))?;
    if !rate.is_finite() {
        return Err(format!("rate must be finite, got {rate}"));
    }
    Ok((Id(joint), rate))
}

/// Parse `args` (program name first) and run the command. Returns the
/// process exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = write!(out, "{}", e.render());
            return 0;
        }
        Err(e) => {
            let text = e.render().to_string();
            let line = text.lines().next().unwrap_or("error: bad arguments");
            let _ = writeln!(err, "{line}");
            return 1;
        }
    };
    let result = match cli.command {
        CliCommand::Simulate(a) => cmd_simulate(&a, out),
        CliCommand::Recognize { file } => cmd_recognize(&file, out).map(|()| 0),
        CliCommand::Serve { config, listen } => cmd_serve(config.as_deref(), listen).map(|()| 0),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.to_string().replace('\n', " "));
            1
        }
    }
}

fn load_document(path: &Path) -> Result<SketchDocument> {
    let bytes = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    sketch::load(&bytes)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn class_name(c: FourBarClass) -> &'static str {
    match c {
        FourBarClass::CrankRocker => "Grashof crank-rocker",
        FourBarClass::DoubleCrank => "Grashof double-crank",
        FourBarClass::DoubleRocker => "Grashof double-rocker",
        FourBarClass::ChangePoint => "change-point",
        FourBarClass::TripleRocker => "non-Grashof triple-rocker",
    }
}

/// Six decimals, without a negative zero.
fn fixed(v: f64) -> String {
    let s = format!("{v:.6}");
    if s.trim_start_matches('-')
        .trim_matches(|c| c == '0' || c == '.')
        .is_empty()
    {
        "0.000000".into()
    } else {
        s
    }
}

/// Driver coordinate in its display unit.
fn drive_text(kind: JointKind, v: f64) -> String {
    match kind {
        JointKind::Revolute => format!("{:.6} deg", v.to_degrees()),
        JointKind::Prismatic => format!("{v:.6}"),
    }
}

/// Simulate every instance of the scene stored in `a.file`. Returns the
/// exit code: 0 when all runs finish Ok, 2 when any halts.
pub fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<i32> {
    if let Some(dt) = a.dt {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "--dt must be > 0, got {dt}"
            )));
        }
    }
    for (flag, v) in [("--cycles", a.cycles), ("--duration", a.duration)] {
        if let Some(v) = v {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{flag} must be > 0, got {v}"
                )));
            }
        }
    }
    let solver = match &a.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            serde_json::from_str::<SolverConfig>(&text).map_err(|e| Error::FormatError {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?
        }
        None => SolverConfig::default(),
    };
    let doc = load_document(&a.file)?;
    let scene = doc
        .content()
        .mechanism
        .as_ref()
        .and_then(|m| m.scene.clone())
        .filter(|s| !s.instances.is_empty())
        .ok_or_else(|| {
            Error::InvalidInput(format!("{} holds no built mechanism", a.file.display()))
        })?;

    let mut instances = scene.instances;
    for &(joint, rate) in &a.drivers {
        let j = instances
            .iter_mut()
            .flat_map(|m| m.joints.iter_mut())
            .find(|j| j.id == joint)
            .ok_or(Error::UnknownEntity {
                kind: "joint",
                id: joint,
            })?;
        match j.driver.as_mut() {
            Some(d) => d.rate = rate,
            None => {
                return Err(Error::InvalidParameter(format!(
                    "joint {joint} is not an input"
                )))
            }
        }
    }

    let mut runners = Vec::new();
    for mech in &instances {
        if mech.ground().is_none() {
            return Err(Error::NoGround(mech.id));
        }
        let runner = Runner::new(mech, solver)?;
        let dt = a.dt.unwrap_or_else(|| runner.default_dt());
        let steps = match (a.duration, a.cycles) {
            (Some(d), _) => (d / dt).round() as u64,
            (None, c) => runner.steps_for_cycles(c.unwrap_or(1.0), dt)?,
        };
        runners.push((mech, runner, dt, steps));
    }

    let mut code = 0;
    let mut traces: Vec<Trace> = Vec::new();
    for (mech, runner, dt, steps) in &mut runners {
        let outcome = runner.run(*dt, *steps)?;
        let st = &outcome.final_state;
        report(out, mech, runner, outcome.states.len(), *dt)?;
        if st.status != SimStatus::Ok {
            code = 2;
        }
        traces.extend(runner.traces.iter().cloned());
    }
    if let Some(p) = &a.csv {
        write_file(p, &trace_csv(&traces))?;
    }
    if let Some(p) = &a.svg {
        let mechs: Vec<&Mechanism> = instances.iter().collect();
        write_file(p, &trace_svg(&mechs, &traces))?;
    }
    Ok(code)
}

fn report(
    out: &mut dyn Write,
    mech: &Mechanism,
    runner: &Runner,
    steps: usize,
    dt: f64,
) -> Result<()> {
    let st = &runner.state;
    let class = match classify_four_bar(mech) {
        Some((_, c)) => class_name(c).to_string(),
        None => format!("{} links, {} joints", mech.links.len(), mech.joints.len()),
    };
    let status = match st.status {
        SimStatus::Ok => "ok",
        SimStatus::Singular => "singular",
        SimStatus::Locked => "locked",
        SimStatus::Diverged => "diverged",
    };
    writeln!(
        out,
        "instance {}: mobility {}, {class}",
        mech.id, mech.mobility
    )?;
    writeln!(
        out,
        "  steps {steps} (dt {dt}), t {}, status {status}, residual {:.3e}",
        st.t, st.residual
    )?;
    for (k, d) in runner.system.drivers.iter().enumerate() {
        let mut line = format!(
            "  input {} rate {} at {}",
            d.joint,
            runner.rates()[k],
            drive_text(d.kind, st.drive[k])
        );
        if let Some(limit) = &st.blocked_at {
            line.push_str(&format!(", limit {}", drive_text(d.kind, limit[k])));
        }
        writeln!(out, "{line}")?;
    }
    for tr in &runner.traces {
        writeln!(
            out,
            "  trace on link {} at ({}, {}): {} samples{}",
            tr.point.link,
            fixed(tr.point.local.x),
            fixed(tr.point.local.y),
            tr.samples.len(),
            if tr.closed { ", closed" } else { "" }
        )?;
    }
    Ok(())
}

/// Print links, joints, instances and mobility recognized in `file`.
pub fn cmd_recognize(file: &Path, out: &mut dyn Write) -> Result<()> {
    let doc = load_document(file)?;
    let content = doc.content();
    let rec = recognize(content, &RecognitionConfig::default());
    if content.ink_strokes().next().is_none() {
        writeln!(out, "no ink strokes")?;
    }
    writeln!(out, "links: {}", rec.links.len())?;
    for l in &rec.links {
        let members: Vec<String> = l.strokes.iter().map(|s| s.to_string()).collect();
        writeln!(
            out,
            "  link {} color {} strokes {}",
            l.id,
            l.color,
            members.join(" ")
        )?;
    }
    writeln!(out, "joints: {}", rec.joints.len())?;
    for j in &rec.joints {
        let kind = match j.kind {
            JointKind::Revolute => "revolute",
            JointKind::Prismatic => "prismatic",
        };
        writeln!(
            out,
            "  joint {} {kind} {}-{} anchor ({}, {})",
            j.id,
            j.a,
            j.b,
            fixed(j.anchor.x),
            fixed(j.anchor.y)
        )?;
    }
    for w in &rec.warnings {
        writeln!(out, "  warning {} {}: {}", w.gesture, w.code, w.message)?;
    }
    if rec.links.is_empty() {
        return Ok(());
    }
    // keep the file's ground and input marks when it has them
    let draft = match &content.mechanism {
        Some(m) => m.draft.refresh(&rec),
        None => MechanismState::from_recognition(&rec).draft,
    };
    let scene = build_mechanisms(&draft, content.scene_diagonal());
    writeln!(out, "instances: {}", scene.instances.len())?;
    for m in &scene.instances {
        writeln!(
            out,
            "  instance {}: {} links, {} joints, mobility {}",
            m.id,
            m.links.len(),
            m.joints.len(),
            m.mobility
        )?;
    }
    Ok(())
}

/// Serve until Ctrl-C.
pub fn cmd_serve(config: Option<&Path>, listen: Option<String>) -> Result<()> {
    let mut cfg = match config {
        Some(p) => ServiceConfig::load(p)?,
        None => ServiceConfig::default(),
    };
    if let Some(l) = listen {
        cfg.listen = l;
    }
    let server = Server::bind(cfg)?;
    let stop = Arc::new(AtomicBool::new(false));
    let flag = Arc::clone(&stop);
    ctrlc::set_handler(move || flag.store(true, Ordering::SeqCst))
        .map_err(|e| Error::Io(format!("cannot install interrupt handler: {e}")))?;
    server.run(stop)
}
