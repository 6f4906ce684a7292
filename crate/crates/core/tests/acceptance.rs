//! Acceptance suite: one PASS/FAIL line per primary criterion.
//!
//! ```text
//! cargo test -p sketchmech --test acceptance
//! ```

mod common;

use common::{
    circles, decode, dist, independent_residual, joint_at, joint_world, run_cycle, runnable,
};
use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sketchmech::fixtures::{self, fb1, ng1, pg1, sc1};
use sketchmech::kinematics::{settle, ConstraintSystem, Runner, SimStatus, SolverConfig};
use sketchmech::mechanism::{move_joint, JointSide, Mechanism};
use sketchmech::recognition::{
    classify_gesture, recognize, GestureClass, GestureThresholds, JointKind, RecognitionConfig,
};
use sketchmech::session::{Event, Registry, Replica};
use sketchmech::sketch::{self, SketchDocument, Stroke, StrokeMode};
use sketchmech::{Id, Point2};
use std::collections::BTreeSet;
use std::f64::consts::{PI, TAU};
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;
type Check = Box<dyn Fn() -> Outcome>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn four_bar_oracle() -> Outcome {
    let started = Instant::now();
    let mech = fixtures::fb1_mechanism();
    let (runner, states) = run_cycle(&mech);
    let elapsed = started.elapsed();
    let (ja, jb) = (joint_at(&mech, fb1::A), joint_at(&mech, fb1::b()));
    ensure(states.len() == 360, || {
        format!("expected 360 steps, got {}", states.len())
    })?;
    let mut worst: f64 = 0.0;
    for (k, st) in states.iter().enumerate() {
        ensure(st.status == SimStatus::Ok, || {
            format!("step {k} status {:?}", st.status)
        })?;
        let theta = (k + 1) as f64 * PI / 180.0;
        ensure((st.drive[0] - theta).abs() < 1e-12, || {
            format!("step {k}: drive {} != {theta}", st.drive[0])
        })?;
        let a = Point2::new(fb1::CRANK * theta.cos(), fb1::CRANK * theta.sin());
        let b = circles(a, fb1::COUPLER, fb1::C, fb1::ROCKER, true);
        let poses = decode(&mech, &st.q);
        let sample = runner.traces[0].samples[k + 1].p;
        let mid = Point2::new((a.x + b.x) / 2.0, (a.y + b.y) / 2.0);
        worst = worst
            .max(dist(joint_world(&mech, &poses, ja), a))
            .max(dist(joint_world(&mech, &poses, jb), b))
            .max(dist(sample, mid));
    }
    ensure(worst <= 1e-8, || {
        format!("max pose error {worst:.3e} > 1e-8")
    })?;
    let tr = &runner.traces[0];
    let gap = dist(tr.samples[0].p, tr.samples.last().unwrap().p);
    ensure(tr.closed && gap <= 1e-6, || {
        format!("trace closed={} gap {gap:.3e}", tr.closed)
    })?;
    ensure(elapsed < Duration::from_secs(1), || {
        format!("run took {elapsed:?}")
    })?;
    Ok(format!(
        "360 angles, max error {worst:.2e}, closure gap {gap:.2e}, {} ms",
        elapsed.as_millis()
    ))
}

fn slider_crank() -> Outcome {
    let mech = fixtures::sc1_mechanism();
    let (runner, states) = run_cycle(&mech);
    ensure(states.len() == 360, || {
        format!("expected 360 steps, got {}", states.len())
    })?;
    let (r, l) = (sc1::CRANK, sc1::ROD);
    let mut worst: f64 = 0.0;
    let mut at_zero = None;
    for (k, st) in states.iter().enumerate() {
        ensure(st.status == SimStatus::Ok, || {
            format!("step {k} status {:?}", st.status)
        })?;
        let theta = sc1::BUILD_ANGLE_DEG.to_radians() + st.drive[0];
        let x = r * theta.cos() + (l * l - (r * theta.sin()).powi(2)).sqrt();
        let p = runner.traces[0].samples[k + 1].p;
        worst = worst.max((p.x - x).abs()).max(p.y.abs());
        if ((theta / TAU).round() * TAU - theta).abs() < 1e-9 {
            at_zero = Some(p.x);
        }
    }
    ensure(worst <= 1e-8, || {
        format!("max slider error {worst:.3e} > 1e-8")
    })?;
    let x0 = at_zero.ok_or("cycle never passed theta = 0")?;
    ensure((x0 - (r + l)).abs() <= 1e-8, || {
        format!("x(0) = {x0}, expected 4")
    })?;
    Ok(format!("360 angles, max error {worst:.2e}, x(0) = {x0}"))
}

fn parallelogram() -> Outcome {
    let mech = fixtures::pg1_mechanism();
    let ground = mech.ground().unwrap();
    let grounded: BTreeSet<Id> = mech
        .joints
        .iter()
        .filter(|j| j.a == ground)
        .map(|j| j.b)
        .collect();
    let coupler = mech
        .links
        .iter()
        .map(|l| l.id)
        .find(|id| *id != ground && !grounded.contains(id))
        .unwrap();
    let (_, states) = run_cycle(&mech);
    ensure(states.len() == 360, || {
        format!("expected 360 steps, got {}", states.len())
    })?;
    let base = mech.link(coupler).unwrap().reference_pose.theta;
    let mut worst: f64 = 0.0;
    for (k, st) in states.iter().enumerate() {
        ensure(st.status == SimStatus::Ok, || {
            format!("step {k} status {:?}", st.status)
        })?;
        worst = worst.max((decode(&mech, &st.q)[&coupler].theta - base).abs());
    }
    ensure(worst <= 1e-9, || format!("coupler rotated by {worst:.3e}"))?;
    let _ = (pg1::CRANK, pg1::COUPLER);
    Ok(format!("full cycle, max coupler rotation {worst:.2e} rad"))
}

fn conservation() -> Outcome {
    let mut checked = 0;
    let mut worst_ratio: f64 = 0.0;
    for (name, mech) in runnable() {
        let (_, states) = run_cycle(&mech);
        let tol = 1e-9 * mech.scene_diagonal;
        for (k, st) in states
            .iter()
            .filter(|s| s.status == SimStatus::Ok)
            .enumerate()
        {
            let res = independent_residual(&mech, st);
            ensure(res <= tol, || {
                format!("{name} step {k}: residual {res:.3e} > {tol:.3e}")
            })?;
            worst_ratio = worst_ratio.max(res / tol);
            checked += 1;
        }
    }
    Ok(format!(
        "{checked} Ok steps over 8 instances, worst residual {worst_ratio:.3} x tolerance"
    ))
}

fn jacobian() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (name, mech) in runnable() {
        let sys = ConstraintSystem::assemble(&mech).map_err(|e| format!("{name}: {e}"))?;
        let mut runner =
            Runner::new(&mech, SolverConfig::default()).map_err(|e| format!("{name}: {e}"))?;
        for _ in 0..100 {
            let target: Vec<f64> = sys
                .drivers
                .iter()
                .map(|d| match d.kind {
                    JointKind::Revolute => rng.random_range(-PI..PI),
                    JointKind::Prismatic => rng.random_range(-0.1..0.1) * mech.scene_diagonal,
                })
                .collect();
            runner.scrub(&target).map_err(|e| format!("{name}: {e}"))?;
            let q = DVector::from_column_slice(&runner.state.q);
            let drive = &runner.state.drive;
            let analytic = sys.jacobian(&q);
            let mut fd = analytic.clone() * 0.0;
            for i in 0..q.len() {
                let h = 1e-6 * q[i].abs().max(1.0);
                let (mut qp, mut qm) = (q.clone(), q.clone());
                qp[i] += h;
                qm[i] -= h;
                let col = (sys.residual(&qp, drive) - sys.residual(&qm, drive)) / (2.0 * h);
                fd.set_column(i, &col);
            }
            let rel = (&analytic - &fd).norm() / analytic.norm();
            worst = worst.max(rel);
            count += 1;
            ensure(rel <= 1e-5, || format!("{name}: relative error {rel:.3e}"))?;
        }
    }
    Ok(format!(
        "{count} poses over 8 instances, worst relative error {worst:.2e}"
    ))
}

fn locking() -> Outcome {
    let mech = fixtures::ng1_mechanism();
    let mut runner = Runner::new(&mech, SolverConfig::default()).map_err(|e| e.to_string())?;
    let dt = runner.default_dt();
    let out = runner.run(dt, 360).map_err(|e| e.to_string())?;
    let st = out.final_state;
    ensure(st.status == SimStatus::Locked, || {
        format!("status {:?}", st.status)
    })?;
    let limit =
        ng1::BUILD_ANGLE_DEG.to_radians() + st.blocked_at.as_ref().ok_or("no limit reported")?[0];
    // input angle at which coupler and output fold into one line
    let reach = ng1::COUPLER + ng1::OUTPUT;
    let oracle = ((ng1::GROUND.powi(2) + ng1::INPUT.powi(2) - reach * reach)
        / (2.0 * ng1::GROUND * ng1::INPUT))
        .acos();
    let err = (limit - oracle).abs();
    ensure(err <= 1e-6, || {
        format!("limit {limit} vs tangency {oracle}: {err:.3e}")
    })?;
    Ok(format!(
        "locked at {:.9} deg, tangency {:.9} deg, error {err:.2e} rad",
        limit.to_degrees(),
        oracle.to_degrees()
    ))
}

fn mobility() -> Outcome {
    let cases = [
        ("four-bar", fixtures::fb1_mechanism(), 1),
        ("five-bar", fixtures::five_bar_mechanism(), 2),
        ("triangle", fixtures::triangle_mechanism(), 0),
    ];
    let mut parts = Vec::new();
    for (name, m, expected) in cases {
        let grubler = 3 * (m.links.len() as i64 - 1) - 2 * m.joints.len() as i64;
        ensure(m.mobility == expected && grubler == expected, || {
            format!(
                "{name}: mobility {} (count gives {grubler}), expected {expected}",
                m.mobility
            )
        })?;
        parts.push(format!("{name} {}", m.mobility));
    }
    Ok(parts.join(", "))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    Circle,
    Arc,
    Line,
    Scribble,
}

fn gesture(points: Vec<Point2>) -> Stroke {
    let t = (0..points.len()).map(|k| 10.0 * k as f64).collect();
    Stroke::new(Id(1), StrokeMode::Gesture, points, t).unwrap()
}

/// One synthetic gesture and, for full circles, its true center and radius.
fn synth(rng: &mut ChaCha8Rng, shape: Shape, noise: f64) -> (Vec<Point2>, Option<(Point2, f64)>) {
    let origin = Point2::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0));
    let rot = rng.random_range(0.0..TAU);
    let (s, c) = rot.sin_cos();
    let place = |p: Point2| Point2::new(origin.x + c * p.x - s * p.y, origin.y + s * p.x + c * p.y);
    let (mut pts, size, truth) = match shape {
        Shape::Circle | Shape::Arc => {
            let r = rng.random_range(0.5..20.0);
            let n = rng.random_range(24..97);
            let sweep = if shape == Shape::Circle {
                TAU
            } else {
                rng.random_range(290f64..340.0).to_radians()
            };
            let pts: Vec<Point2> = (0..n)
                .map(|k| {
                    let a = sweep * k as f64
                        / if shape == Shape::Circle {
                            n as f64
                        } else {
                            (n - 1) as f64
                        };
                    place(Point2::new(r * a.cos(), r * a.sin()))
                })
                .collect();
            (
                pts,
                2.0 * r,
                (shape == Shape::Circle).then_some((origin, r)),
            )
        }
        Shape::Line => {
            let len = rng.random_range(1.0..40.0);
            let n = rng.random_range(10..61);
            let pts = (0..n)
                .map(|k| place(Point2::new(len * k as f64 / (n - 1) as f64, 0.0)))
                .collect();
            (pts, len, None)
        }
        Shape::Scribble => {
            // Z stroke: out, diagonally back, out again
            let w = rng.random_range(1.0..30.0);
            let h = w * rng.random_range(0.5..1.0);
            let corners = [
                Point2::new(0.0, 0.0),
                Point2::new(w, 0.0),
                Point2::new(0.0, h),
                Point2::new(w, h),
            ];
            let mut pts = Vec::new();
            for seg in corners.windows(2) {
                for k in 0..20 {
                    let f = k as f64 / 20.0;
                    pts.push(place(Point2::new(
                        seg[0].x + f * (seg[1].x - seg[0].x),
                        seg[0].y + f * (seg[1].y - seg[0].y),
                    )));
                }
            }
            pts.push(place(corners[3]));
            (pts, w.max(h), None)
        }
    };
    if noise > 0.0 {
        for p in &mut pts {
            p.x += rng.random_range(-1.0..1.0) * noise * size;
            p.y += rng.random_range(-1.0..1.0) * noise * size;
        }
    }
    (pts, truth)
}

fn expected_kind(shape: Shape, class: &GestureClass) -> bool {
    match shape {
        Shape::Circle | Shape::Arc => matches!(class, GestureClass::Circle { .. }),
        Shape::Line => matches!(class, GestureClass::Line { .. }),
        Shape::Scribble => matches!(class, GestureClass::Unknown),
    }
}

/// Partition of ink strokes, each stroke named by its first point.
fn partition(doc: &SketchDocument) -> BTreeSet<Vec<(u64, u64)>> {
    let rec = recognize(doc.content(), &RecognitionConfig::default());
    rec.links
        .iter()
        .map(|l| {
            let mut key: Vec<(u64, u64)> = l
                .strokes
                .iter()
                .map(|id| {
                    let p = doc.content().stroke(*id).unwrap().points[0];
                    (p.x.to_bits(), p.y.to_bits())
                })
                .collect();
            key.sort();
            key
        })
        .collect()
}

fn recognition_corpus() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let th = GestureThresholds::default();
    let shapes = [
        (Shape::Circle, 30),
        (Shape::Arc, 20),
        (Shape::Line, 30),
        (Shape::Scribble, 20),
    ];
    let (mut clean_ok, mut clean_total, mut noisy_ok, mut noisy_total) = (0, 0, 0, 0);
    let mut worst_anchor: f64 = 0.0;
    for noisy in [false, true] {
        for (shape, n) in shapes {
            for _ in 0..n {
                let noise = if noisy {
                    rng.random_range(0.0..0.02)
                } else {
                    0.0
                };
                let (pts, truth) = synth(&mut rng, shape, noise);
                let class = classify_gesture(&gesture(pts), &th).unwrap();
                let ok = expected_kind(shape, &class);
                if noisy {
                    noisy_total += 1;
                    noisy_ok += ok as usize;
                } else {
                    clean_total += 1;
                    clean_ok += ok as usize;
                    ensure(ok, || format!("clean {shape:?} classified as {class:?}"))?;
                    if let (Some((center, r)), GestureClass::Circle { center: found, .. }) =
                        (truth, class)
                    {
                        worst_anchor = worst_anchor.max(dist(center, found) / r);
                    }
                }
            }
        }
    }
    ensure(worst_anchor <= 1e-9, || {
        format!("full-circle anchor error {worst_anchor:.3e} x radius")
    })?;

    // grouping: chains of touching segments, shuffled 20 times
    let mut strokes: Vec<Vec<Point2>> = Vec::new();
    for cluster in 0..8 {
        let base = Point2::new((cluster % 4) as f64 * 30.0, (cluster / 4) as f64 * 30.0);
        let mut at = base;
        for _ in 0..rng.random_range(1..5) {
            let next = Point2::new(
                at.x + rng.random_range(2.0..6.0),
                at.y + rng.random_range(-4.0..4.0),
            );
            strokes.push(
                (0..8)
                    .map(|k| {
                        Point2::new(
                            at.x + (next.x - at.x) * k as f64 / 7.0,
                            at.y + (next.y - at.y) * k as f64 / 7.0,
                        )
                    })
                    .collect(),
            );
            at = next;
        }
    }
    let build = |order: &[usize]| {
        let mut doc = SketchDocument::new();
        for &i in order {
            let t = (0..strokes[i].len()).map(|k| k as f64).collect();
            doc.add_stroke_parts(strokes[i].clone(), t, StrokeMode::Ink)
                .unwrap();
        }
        doc
    };
    let mut order: Vec<usize> = (0..strokes.len()).collect();
    let reference = partition(&build(&order));
    ensure(reference.len() == 8, || {
        format!("expected 8 links, got {}", reference.len())
    })?;
    for k in 0..20 {
        order.shuffle(&mut rng);
        let p = partition(&build(&order));
        ensure(p == reference, || {
            format!("permutation {k} changed the partition")
        })?;
    }
    Ok(format!(
        "clean {clean_ok}/{clean_total}, noisy {noisy_ok}/{noisy_total}, anchor error {worst_anchor:.1e} r, 20 permutations of {} strokes stable",
        strokes.len()
    ))
}

fn joint_manipulation() -> Outcome {
    let mech = fixtures::fb1_mechanism();
    let poses = Runner::new(&mech, SolverConfig::default())
        .map_err(|e| e.to_string())?
        .poses();
    let jb = joint_at(&mech, fb1::b());
    let jc = joint_at(&mech, fb1::C);
    let j = mech.joint(jb).unwrap();
    let rocker = mech.joint(jc).unwrap().b;
    let side = if j.b == rocker {
        JointSide::B
    } else {
        JointSide::A
    };
    let b = fb1::b();
    let u = Point2::new(
        (b.x - fb1::C.x) / fb1::ROCKER,
        (b.y - fb1::C.y) / fb1::ROCKER,
    );
    let length = |m: &Mechanism| {
        let a = m.anchors_on(rocker);
        dist(a[0].1, a[1].1)
    };
    let moved = move_joint(&mech, &poses, jb, Point2::new(b.x + u.x, b.y + u.y), side)
        .map_err(|e| e.to_string())?;
    let grown = length(&moved) - length(&mech);
    ensure((grown - 1.0).abs() <= 1e-12, || {
        format!("rocker grew by {grown}")
    })?;
    let back = move_joint(&moved, &poses, jb, b, side).map_err(|e| e.to_string())?;
    let mut trip: f64 = 0.0;
    for (x, y) in back.joints.iter().zip(&mech.joints) {
        trip = trip
            .max(dist(x.anchor_a, y.anchor_a))
            .max(dist(x.anchor_b, y.anchor_b));
    }
    ensure(trip <= 1e-9, || {
        format!("round trip moved anchors by {trip:.3e}")
    })?;
    let settled = settle(&moved).map_err(|e| e.to_string())?;
    let runner = Runner::new(&settled, SolverConfig::default()).map_err(|e| e.to_string())?;
    ensure(
        runner.joint_residual() <= 1e-9 * mech.scene_diagonal,
        || "edited linkage does not re-assemble".into(),
    )?;
    Ok(format!("length change {grown}, round trip {trip:.1e}"))
}

fn persistence_and_replay(suite_start: Instant) -> Outcome {
    for (name, doc) in fixtures::all() {
        let text = sketch::save(&doc);
        let again =
            sketch::save(&sketch::load(text.as_bytes()).map_err(|e| format!("{name}: {e}"))?);
        ensure(again == text, || {
            format!("{name}: save/load is not a fixpoint")
        })?;
    }
    let script = common::fb1_script();
    ensure(script.len() == 50, || {
        format!("script has {} commands", script.len())
    })?;
    let mut reg = Registry::new();
    let mut full = Replica::new();
    let mut late: Option<Replica> = None;
    let mut errors = Vec::new();
    let mut feed = |events: Vec<sketchmech::session::EventEnvelope>,
                    full: &mut Replica,
                    late: &mut Option<Replica>| {
        for ev in events {
            // clients only ever see the wire text
            let ev: sketchmech::session::EventEnvelope =
                serde_json::from_str(&ev.to_json()).expect("event parses back");
            if let Event::Error { code, message } = &ev.event {
                errors.push(format!("seq {:?}: {code}: {message}", ev.seq));
            }
            assert!(full.apply(&ev), "delta out of order at {:?}", ev.seq);
            match late.as_mut() {
                Some(r) => assert!(r.apply(&ev)),
                None if matches!(ev.event, Event::Snapshot { .. }) => {
                    let mut r = Replica::new();
                    r.apply(&ev);
                    *late = Some(r);
                }
                None => {}
            }
        }
    };
    for line in &script {
        let events = reg.handle_text(line);
        feed(events, &mut full, &mut late);
        if let Some(s) = reg.session_mut("s1") {
            let mut guard = 0;
            while s.is_running() && guard < 10_000 {
                feed(s.advance(25), &mut full, &mut late);
                guard += 1;
            }
        }
    }
    ensure(errors.is_empty(), || {
        format!("script errors: {}", errors.join("; "))
    })?;
    let session = reg.session("s1").ok_or("no session")?;
    let truth = serde_json::to_string(&session.snapshot()).unwrap();
    ensure(full.to_json() == truth, || {
        "delta replay differs from snapshot".into()
    })?;
    let late = late.ok_or("no snapshot event")?;
    ensure(late.to_json() == truth, || {
        "snapshot + deltas differs from snapshot".into()
    })?;
    let total = suite_start.elapsed();
    ensure(total < Duration::from_secs(30), || {
        format!("suite took {total:?}")
    })?;
    Ok(format!(
        "{} fixtures fixpoint, 50 commands to revision {} replayed byte-identically, suite {:.1} s",
        fixtures::all().len(),
        session.revision(),
        total.as_secs_f64()
    ))
}

fn main() {
    let start = Instant::now();
    let criteria: Vec<(&str, Check)> = vec![
        ("four-bar oracle", Box::new(four_bar_oracle)),
        ("slider-crank analytic", Box::new(slider_crank)),
        ("parallelogram invariant", Box::new(parallelogram)),
        ("constraint conservation", Box::new(conservation)),
        ("jacobian vs finite differences", Box::new(jacobian)),
        ("locking detection", Box::new(locking)),
        ("mobility", Box::new(mobility)),
        ("recognition corpus", Box::new(recognition_corpus)),
        ("joint manipulation", Box::new(joint_manipulation)),
        (
            "persistence and protocol replay",
            Box::new(move || persistence_and_replay(start)),
        ),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let t0 = Instant::now();
        let result =
            std::panic::catch_unwind(std::panic::AssertUnwindSafe(&check)).unwrap_or_else(|p| {
                Err(p
                    .downcast_ref::<String>()
                    .cloned()
                    .unwrap_or_else(|| "panicked".into()))
            });
        match result {
            Ok(detail) => println!(
                "PASS {name}: {detail} [{:.2} s]",
                t0.elapsed().as_secs_f64()
            ),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why} [{:.2} s]", t0.elapsed().as_secs_f64());
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
