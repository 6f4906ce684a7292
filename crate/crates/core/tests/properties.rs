mod common;

use common::dist;
use proptest::prelude::*;
use sketchmech::recognition::{classify_gesture, GestureClass, GestureThresholds};
use sketchmech::sketch::{self, resample_stroke, SketchDocument, Stroke, StrokeMode};
use sketchmech::{Id, Point2};
use std::f64::consts::TAU;

fn polyline() -> impl Strategy<Value = Vec<Point2>> {
    prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 2..30)
        .prop_map(|v| {
            v.into_iter()
                .map(|(x, y)| Point2::new(x, y))
                .collect::<Vec<_>>()
        })
        .prop_filter("needs some length", |p| {
            p.windows(2).any(|w| dist(w[0], w[1]) > 1e-3)
        })
}

fn times(n: usize) -> Vec<f64> {
    (0..n).map(|k| 8.0 * k as f64).collect()
}

fn stroke(points: Vec<Point2>, mode: StrokeMode) -> Stroke {
    let t = times(points.len());
    Stroke::new(Id(1), mode, points, t).unwrap()
}

fn transform(p: Point2, scale: f64, angle: f64, shift: Point2) -> Point2 {
    let (s, c) = angle.sin_cos();
    Point2::new(
        shift.x + scale * (c * p.x - s * p.y),
        shift.y + scale * (s * p.x + c * p.y),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn undo_all_then_redo_all_restores_each_state(strokes in prop::collection::vec(polyline(), 1..8)) {
        let mut doc = SketchDocument::new();
        let mut states = vec![doc.content().clone()];
        for (k, pts) in strokes.into_iter().enumerate() {
            let mode = if k % 3 == 2 { StrokeMode::Gesture } else { StrokeMode::Ink };
            let n = pts.len();
            doc.add_stroke_parts(pts, times(n), mode).unwrap();
            states.push(doc.content().clone());
        }
        for expected in states.iter().rev().skip(1) {
            prop_assert!(doc.undo());
            prop_assert_eq!(doc.content(), expected);
        }
        prop_assert!(!doc.undo());
        for expected in states.iter().skip(1) {
            prop_assert!(doc.redo());
            prop_assert_eq!(doc.content(), expected);
        }
        prop_assert!(!doc.redo());
    }

    #[test]
    fn save_load_is_a_fixpoint(strokes in prop::collection::vec(polyline(), 0..6), erase in any::<prop::sample::Index>()) {
        let mut doc = SketchDocument::new();
        let mut ids = Vec::new();
        for pts in strokes {
            let n = pts.len();
            ids.push(doc.add_stroke_parts(pts, times(n), StrokeMode::Ink).unwrap());
        }
        if !ids.is_empty() {
            doc.erase_stroke(ids[erase.index(ids.len())]).unwrap();
        }
        doc.set_underlay("scan.png", Point2::new(0.1, -0.3), 0.7, 0.3).unwrap();
        let first = sketch::save(&doc);
        let again = sketch::save(&sketch::load(first.as_bytes()).unwrap());
        prop_assert_eq!(&first, &again);
        let loaded = sketch::load(first.as_bytes()).unwrap();
        prop_assert_eq!(loaded.content(), doc.content());
    }

    #[test]
    fn resampling_a_straight_stroke_is_equidistant(
        a in (-50.0f64..50.0, -50.0f64..50.0),
        dir in 0.0f64..TAU,
        mut cuts in prop::collection::vec(0.0f64..1.0, 0..20),
        len in 0.5f64..80.0,
        n in 2usize..64,
    ) {
        // Irregularly spaced samples along one segment.
        cuts.push(0.0);
        cuts.push(1.0);
        cuts.sort_by(f64::total_cmp);
        let u = Point2::new(dir.cos(), dir.sin());
        let pts: Vec<Point2> = cuts.iter().map(|f| Point2::new(a.0 + f * len * u.x, a.1 + f * len * u.y)).collect();
        let out = resample_stroke(&stroke(pts.clone(), StrokeMode::Ink), n).unwrap();
        prop_assert_eq!(out.len(), n);
        let step = len / (n - 1) as f64;
        for w in out.windows(2) {
            prop_assert!((dist(w[0], w[1]) - step).abs() <= 1e-9 * len);
        }
        prop_assert!(dist(out[0], pts[0]) <= 1e-12 * len);
        prop_assert!(dist(out[n - 1], pts[pts.len() - 1]) <= 1e-9 * len);
    }

    #[test]
    fn resampled_chords_never_exceed_arc_spacing(pts in polyline(), n in 2usize..80) {
        let length: f64 = pts.windows(2).map(|w| dist(w[0], w[1])).sum();
        let out = resample_stroke(&stroke(pts.clone(), StrokeMode::Ink), n).unwrap();
        let step = length / (n - 1) as f64;
        for w in out.windows(2) {
            prop_assert!(dist(w[0], w[1]) <= step + 1e-9 * length);
        }
        prop_assert!(dist(out[n - 1], pts[pts.len() - 1]) <= 1e-9 * length);
    }

    #[test]
    fn circle_class_follows_rigid_motion_and_scale(
        r in 0.5f64..10.0,
        n in 24usize..90,
        scale in 0.1f64..20.0,
        angle in 0.0f64..TAU,
        shift in (-100.0f64..100.0, -100.0f64..100.0),
    ) {
        let th = GestureThresholds::default();
        let base: Vec<Point2> = (0..n).map(|k| {
            let a = TAU * k as f64 / n as f64;
            Point2::new(r * a.cos(), r * a.sin())
        }).collect();
        let shift = Point2::new(shift.0, shift.1);
        let moved: Vec<Point2> = base.iter().map(|&p| transform(p, scale, angle, shift)).collect();
        let class = classify_gesture(&stroke(moved, StrokeMode::Gesture), &th).unwrap();
        match class {
            GestureClass::Circle { center, radius } => {
                prop_assert!(dist(center, shift) <= 1e-9 * r * scale);
                prop_assert!((radius - r * scale).abs() <= 1e-6 * r * scale);
            }
            other => prop_assert!(false, "expected a circle, got {:?}", other),
        }
    }

    #[test]
    fn line_class_follows_rigid_motion_and_scale(
        len in 1.0f64..40.0,
        n in 8usize..60,
        scale in 0.1f64..20.0,
        angle in 0.0f64..TAU,
        shift in (-100.0f64..100.0, -100.0f64..100.0),
    ) {
        let th = GestureThresholds::default();
        let shift = Point2::new(shift.0, shift.1);
        let pts: Vec<Point2> = (0..n)
            .map(|k| transform(Point2::new(len * k as f64 / (n - 1) as f64, 0.0), scale, angle, shift))
            .collect();
        let class = classify_gesture(&stroke(pts, StrokeMode::Gesture), &th).unwrap();
        match class {
            GestureClass::Line { point, direction } => {
                let expected = Point2::new(angle.cos(), angle.sin());
                prop_assert!((direction.x * expected.y - direction.y * expected.x).abs() <= 1e-9);
                // `point` lies on the transformed segment's line
                let off = (point.x - shift.x) * -expected.y + (point.y - shift.y) * expected.x;
                prop_assert!(off.abs() <= 1e-9 * len * scale);
            }
            other => prop_assert!(false, "expected a line, got {:?}", other),
        }
    }
}
