//! Synthetic sketches of reference linkages.
//!
//! Each fixture is drawn the way a designer would sketch it: every link is
//! an ink stroke that stops short of its joints, every revolute joint is a
//! circle gesture around the pivot, every slider a line gesture along the
//! rail. The document is then recognized, marked and built through the
//! normal pipeline, so fixtures exercise recognition as well as the solver.
//!
//! The shipped `fixtures/*.mech.json` files are written from these
//! functions by `examples/generate_fixtures.rs`.

use crate::geom::Point2;
use crate::mechanism::{build_mechanisms, trace_point, Mechanism, MechanismState};
use crate::recognition::{recognize, BuildDraft, RecognitionConfig};
use crate::sketch::{SketchDocument, StrokeMode};
use crate::Id;
use std::f64::consts::PI;

/// FB1 crank-rocker: ground pivots O=(0,0), C=(8,0); crank 2, coupler 6,
/// rocker 5. Built at crank angle 0 on the upper branch.
pub mod fb1 {
    use super::Point2;
    pub const O: Point2 = Point2::new(0.0, 0.0);
    pub const A: Point2 = Point2::new(2.0, 0.0);
    pub const C: Point2 = Point2::new(8.0, 0.0);
    pub const CRANK: f64 = 2.0;
    pub const COUPLER: f64 = 6.0;
    pub const ROCKER: f64 = 5.0;
    pub const GROUND: f64 = 8.0;

    /// B = (71/12, sqrt(2975)/12).
    pub fn b() -> Point2 {
        Point2::new(71.0 / 12.0, 2975f64.sqrt() / 12.0)
    }
}

/// SC1 slider-crank: crank r=1 about the origin, rod l=3, slider on the
/// x-axis. Built at crank angle 90 degrees.
pub mod sc1 {
    pub const CRANK: f64 = 1.0;
    pub const ROD: f64 = 3.0;
    pub const BUILD_ANGLE_DEG: f64 = 90.0;
}

/// PG1 parallelogram: crank 2, coupler 6, rocker 2, ground 6. Built at a
/// crank angle of 60.5 degrees so 1-degree steps never land exactly on a
/// collinear change point.
pub mod pg1 {
    pub const CRANK: f64 = 2.0;
    pub const COUPLER: f64 = 6.0;
    pub const GROUND: f64 = 6.0;
    pub const BUILD_ANGLE_DEG: f64 = 60.5;
}

/// NG1 non-Grashof triple rocker driven at the input rocker: ground 5,
/// input 3, coupler 3, output 1.5. Built at input angle 30 degrees.
pub mod ng1 {
    pub const GROUND: f64 = 5.0;
    pub const INPUT: f64 = 3.0;
    pub const COUPLER: f64 = 3.0;
    pub const OUTPUT: f64 = 1.5;
    pub const BUILD_ANGLE_DEG: f64 = 30.0;
}

/// Intersection of circles (c1, r1) and (c2, r2) to the left of c1 -> c2
/// (`upper = true`) or to its right.
pub fn circle_intersection(
    c1: Point2,
    r1: f64,
    c2: Point2,
    r2: f64,
    upper: bool,
) -> Option<Point2> {
    let d = c1.distance(c2);
    if d == 0.0 || d > r1 + r2 || d < (r1 - r2).abs() {
        return None;
    }
    let a = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
    let h = (r1 * r1 - a * a).max(0.0).sqrt();
    let u = (c2 - c1) * (1.0 / d);
    let p = c1 + u * a;
    Some(if upper {
        p + u.perp() * h
    } else {
        p - u.perp() * h
    })
}

fn polar(r: f64, deg: f64) -> Point2 {
    Point2::new(r, 0.0).rotated(deg.to_radians())
}

/// Incremental sketch author used by the fixtures.
pub struct SketchBuilder {
    doc: SketchDocument,
    clock: f64,
    gap: f64,
}

impl SketchBuilder {
    /// `gap` is how far link strokes stop short of a joint.
    pub fn new(gap: f64) -> Self {
        Self {
            doc: SketchDocument::new(),
            clock: 0.0,
            gap,
        }
    }

    fn stroke(&mut self, points: Vec<Point2>, mode: StrokeMode) -> Id {
        let samples: Vec<(Point2, f64)> = points
            .into_iter()
            .map(|p| {
                self.clock += 8.0;
                (p, self.clock)
            })
            .collect();
        self.clock += 400.0;
        self.doc
            .add_stroke(&samples, mode)
            .expect("fixture strokes are valid")
    }

    /// Free-form ink polyline, densified to ~8 samples per segment.
    pub fn ink(&mut self, path: &[Point2]) -> Id {
        let mut pts = Vec::new();
        for w in path.windows(2) {
            for k in 0..8 {
                pts.push(w[0].lerp(w[1], k as f64 / 8.0));
            }
        }
        pts.push(*path.last().unwrap());
        self.stroke(pts, StrokeMode::Ink)
    }

    /// Straight bar between two joint centers, trimmed by the gap at both ends.
    pub fn bar(&mut self, a: Point2, b: Point2) -> Id {
        let u = (b - a).normalized().unwrap();
        self.ink(&[a + u * self.gap, b - u * self.gap])
    }

    /// Closed circle gesture of 48 uniform samples.
    pub fn circle(&mut self, center: Point2, radius: f64) -> Id {
        let pts = (0..48)
            .map(|k| center + polar(radius, 360.0 * k as f64 / 48.0))
            .collect();
        self.stroke(pts, StrokeMode::Gesture)
    }

    /// Straight line gesture from `a` to `b`.
    pub fn line(&mut self, a: Point2, b: Point2) -> Id {
        let pts = (0..=24).map(|k| a.lerp(b, k as f64 / 24.0)).collect();
        self.stroke(pts, StrokeMode::Gesture)
    }

    pub fn underlay(&mut self, image: &str, position: Point2, scale: f64) -> Id {
        self.doc.set_underlay(image, position, scale, 0.0).unwrap()
    }

    pub fn document(&self) -> &SketchDocument {
        &self.doc
    }

    /// Recognize, mark ground and inputs, build, register tracked points and
    /// store the result in the document. History is discarded.
    pub fn finish(self, marks: Marks<'_>) -> SketchDocument {
        let mut doc = self.doc;
        let rec = recognize(doc.content(), &RecognitionConfig::default());
        assert_eq!(rec.links.len(), marks.links, "fixture link count");
        assert_eq!(
            rec.joints.len(),
            marks.joints,
            "fixture joint count: {:?}",
            rec.warnings
        );
        let mut draft = BuildDraft::from_recognition(&rec);
        for &g in marks.ground {
            draft.mark_ground(g).unwrap();
        }
        for &(j, rate) in marks.inputs {
            draft.set_driver(j, rate).unwrap();
        }
        let mut scene = build_mechanisms(&draft, doc.content().scene_diagonal());
        for &(link, p) in marks.tracked {
            let m = scene
                .instances
                .iter_mut()
                .find(|m| m.link(link).is_some())
                .unwrap();
            *m = trace_point(m, link, p).unwrap();
        }
        doc.set_mechanism(Some(MechanismState {
            draft,
            scene: Some(scene),
        }))
        .unwrap();
        SketchDocument::from_content(doc.content().clone())
    }
}

pub struct Marks<'a> {
    pub links: usize,
    pub joints: usize,
    pub ground: &'a [Id],
    pub inputs: &'a [(Id, f64)],
    /// (link, local point = world point at build)
    pub tracked: &'a [(Id, Point2)],
}

fn first_instance(doc: &SketchDocument) -> Mechanism {
    doc.content()
        .mechanism
        .as_ref()
        .unwrap()
        .scene
        .as_ref()
        .unwrap()
        .instances[0]
        .clone()
}

fn fb1_strokes(b: &mut SketchBuilder, shift: Point2) -> ([Id; 4], [Id; 4]) {
    let (o, a, bb, c) = (
        fb1::O + shift,
        fb1::A + shift,
        fb1::b() + shift,
        fb1::C + shift,
    );
    let g = b.gap;
    let ground = b.ink(&[
        o + Point2::new(0.0, -g),
        o + Point2::new(0.0, -1.5),
        c + Point2::new(0.0, -1.5),
        c + Point2::new(0.0, -g),
    ]);
    let crank = b.bar(o, a);
    let coupler = b.bar(a, bb);
    let rocker = b.bar(bb, c);
    let jo = b.circle(o, 0.75);
    let ja = b.circle(a, 0.75);
    let jb = b.circle(bb, 0.75);
    let jc = b.circle(c, 0.75);
    ([ground, crank, coupler, rocker], [jo, ja, jb, jc])
}

/// FB1 with the crank driven at +1 rad/s and the coupler midpoint traced.
pub fn fb1() -> SketchDocument {
    let mut b = SketchBuilder::new(0.5);
    let (links, joints) = fb1_strokes(&mut b, Point2::ORIGIN);
    let mid = fb1::A.midpoint(fb1::b());
    b.finish(Marks {
        links: 4,
        joints: 4,
        ground: &[links[0]],
        inputs: &[(joints[0], 1.0)],
        tracked: &[(links[2], mid)],
    })
}

pub fn fb1_mechanism() -> Mechanism {
    first_instance(&fb1())
}

/// Two FB1 copies side by side in one sketch.
pub fn two_four_bars() -> SketchDocument {
    let mut b = SketchBuilder::new(0.5);
    let (l1, j1) = fb1_strokes(&mut b, Point2::ORIGIN);
    let shift = Point2::new(12.0, 0.0);
    let (l2, j2) = fb1_strokes(&mut b, shift);
    let mid = fb1::A.midpoint(fb1::b());
    b.finish(Marks {
        links: 8,
        joints: 8,
        ground: &[l1[0], l2[0]],
        inputs: &[(j1[0], 1.0), (j2[0], -1.0)],
        tracked: &[(l1[2], mid), (l2[2], mid + shift)],
    })
}

/// SC1 slider-crank with the crank driven at +1 rad/s; the slider pin is
/// traced.
pub fn sc1() -> SketchDocument {
    let mut b = SketchBuilder::new(0.3);
    let o = Point2::ORIGIN;
    let a = polar(sc1::CRANK, sc1::BUILD_ANGLE_DEG);
    let pin = Point2::new(a.x + (sc1::ROD.powi(2) - a.y.powi(2)).sqrt(), 0.0);
    let ground = b.ink(&[
        Point2::new(0.0, -0.3),
        Point2::new(0.0, -1.0),
        Point2::new(4.5, -1.0),
    ]);
    let crank = b.bar(o, a);
    let _rod = b.bar(a, pin);
    let block = b.ink(&[
        pin + Point2::new(0.0, -0.3),
        pin + Point2::new(0.0, -0.85),
        pin + Point2::new(-0.5, -0.85),
        pin + Point2::new(0.5, -0.85),
    ]);
    let jo = b.circle(o, 0.45);
    let _ja = b.circle(a, 0.45);
    let _jb = b.circle(pin, 0.45);
    let _slide = b.line(
        Point2::new(pin.x - 1.0, -0.925),
        Point2::new(pin.x + 1.0, -0.925),
    );
    let _ = crank;
    b.finish(Marks {
        links: 4,
        joints: 4,
        ground: &[ground],
        inputs: &[(jo, 1.0)],
        tracked: &[(block, pin)],
    })
}

pub fn sc1_mechanism() -> Mechanism {
    first_instance(&sc1())
}

/// PG1 parallelogram, crank driven at +1 rad/s, coupler midpoint traced.
pub fn pg1() -> SketchDocument {
    let mut b = SketchBuilder::new(0.5);
    let o = Point2::ORIGIN;
    let c = Point2::new(pg1::GROUND, 0.0);
    let a = polar(pg1::CRANK, pg1::BUILD_ANGLE_DEG);
    let bb = a + Point2::new(pg1::COUPLER, 0.0);
    let ground = b.ink(&[
        Point2::new(0.0, -0.5),
        Point2::new(0.0, -1.5),
        Point2::new(6.0, -1.5),
        Point2::new(6.0, -0.5),
    ]);
    let _crank = b.bar(o, a);
    let coupler = b.bar(a, bb);
    let _rocker = b.bar(bb, c);
    let jo = b.circle(o, 0.75);
    b.circle(a, 0.75);
    b.circle(bb, 0.75);
    b.circle(c, 0.75);
    b.finish(Marks {
        links: 4,
        joints: 4,
        ground: &[ground],
        inputs: &[(jo, 1.0)],
        tracked: &[(coupler, a.midpoint(bb))],
    })
}

pub fn pg1_mechanism() -> Mechanism {
    first_instance(&pg1())
}

/// NG1 triple rocker driven at its input rocker (+1 rad/s). Locks when
/// coupler and output become collinear.
pub fn ng1() -> SketchDocument {
    let mut b = SketchBuilder::new(0.35);
    let o = Point2::ORIGIN;
    let c = Point2::new(ng1::GROUND, 0.0);
    let a = polar(ng1::INPUT, ng1::BUILD_ANGLE_DEG);
    let bb = circle_intersection(a, ng1::COUPLER, c, ng1::OUTPUT, true).unwrap();
    let ground = b.ink(&[
        Point2::new(0.0, -0.35),
        Point2::new(0.0, -1.5),
        Point2::new(5.0, -1.5),
        Point2::new(5.0, -0.35),
    ]);
    b.bar(o, a);
    let coupler = b.bar(a, bb);
    b.bar(bb, c);
    let jo = b.circle(o, 0.5);
    b.circle(a, 0.5);
    b.circle(bb, 0.5);
    b.circle(c, 0.5);
    b.finish(Marks {
        links: 4,
        joints: 4,
        ground: &[ground],
        inputs: &[(jo, 1.0)],
        tracked: &[(coupler, a.midpoint(bb))],
    })
}

pub fn ng1_mechanism() -> Mechanism {
    first_instance(&ng1())
}

/// Five-bar with one input: mobility 2, so it cannot be simulated until a
/// second input is selected.
pub fn five_bar() -> SketchDocument {
    let mut b = SketchBuilder::new(0.4);
    let o = Point2::ORIGIN;
    let e = Point2::new(6.0, 0.0);
    let a = polar(2.0, 60.0);
    let d = e + polar(2.0, 120.0);
    let top = Point2::new(3.0, 4.0);
    let ground = b.ink(&[
        Point2::new(0.0, -0.4),
        Point2::new(0.0, -1.5),
        Point2::new(6.0, -1.5),
        Point2::new(6.0, -0.4),
    ]);
    b.bar(o, a);
    b.bar(a, top);
    b.bar(top, d);
    b.bar(d, e);
    let jo = b.circle(o, 0.6);
    b.circle(a, 0.6);
    b.circle(top, 0.6);
    b.circle(d, 0.6);
    b.circle(e, 0.6);
    b.finish(Marks {
        links: 5,
        joints: 5,
        ground: &[ground],
        inputs: &[(jo, 1.0)],
        tracked: &[],
    })
}

pub fn five_bar_mechanism() -> Mechanism {
    first_instance(&five_bar())
}

/// Rigid triangle (mobility 0) with an input selected anyway.
pub fn triangle() -> SketchDocument {
    let mut b = SketchBuilder::new(0.4);
    let p1 = Point2::ORIGIN;
    let p2 = Point2::new(4.0, 0.0);
    let p3 = Point2::new(2.0, 3.0);
    let ground = b.bar(p1, p2);
    b.bar(p2, p3);
    b.bar(p3, p1);
    let j1 = b.circle(p1, 0.6);
    b.circle(p2, 0.6);
    b.circle(p3, 0.6);
    b.finish(Marks {
        links: 3,
        joints: 3,
        ground: &[ground],
        inputs: &[(j1, 1.0)],
        tracked: &[],
    })
}

pub fn triangle_mechanism() -> Mechanism {
    first_instance(&triangle())
}

/// Bass-drum pedal traced over a reference photo: heel-hinged footboard
/// (input), strap to the beater cam, beater arm pivoting on the frame. The
/// beater head is traced and carries a decoration.
pub fn drum_pedal() -> SketchDocument {
    let mut b = SketchBuilder::new(0.5);
    b.underlay("images/drum_pedal.png", Point2::new(-1.0, -2.0), 0.01);
    let heel = Point2::ORIGIN;
    let axle = Point2::new(5.0, 4.0);
    let toe = polar(2.0, 20.0);
    let cam = circle_intersection(toe, 4.2, axle, 1.8, true).unwrap();
    let head = Point2::new(5.6, 7.5);
    let frame = b.ink(&[
        Point2::new(0.0, -0.5),
        Point2::new(0.0, -1.5),
        Point2::new(5.0, -1.5),
        Point2::new(5.0, 3.5),
    ]);
    b.bar(heel, toe);
    b.bar(toe, cam);
    let u = (axle - cam).normalized().unwrap();
    let arm = b.ink(&[cam + u * 0.5, axle, head]);
    let j_heel = b.circle(heel, 0.75);
    b.circle(toe, 0.75);
    b.circle(cam, 0.75);
    b.circle(axle, 0.75);
    let mut doc = b.finish(Marks {
        links: 4,
        joints: 4,
        ground: &[frame],
        inputs: &[(j_heel, 0.5)],
        tracked: &[(arm, head)],
    });
    let ball: Vec<Point2> = (0..=24)
        .map(|k| head + polar(0.4, 15.0 * k as f64))
        .collect();
    let t = (0..ball.len()).map(|k| 8.0 * k as f64).collect();
    doc.attach_decoration(arm, vec![(ball, t)]).unwrap();
    SketchDocument::from_content(doc.content().clone())
}

/// Named fixtures in shipping order.
pub fn all() -> Vec<(&'static str, SketchDocument)> {
    vec![
        ("fb1", fb1()),
        ("sc1", sc1()),
        ("pg1", pg1()),
        ("ng1", ng1()),
        ("five_bar", five_bar()),
        ("triangle", triangle()),
        ("drum_pedal", drum_pedal()),
        ("two_four_bars", two_four_bars()),
    ]
}

/// Angle of `p` about `center`, degrees in (-180, 180].
pub fn angle_deg(center: Point2, p: Point2) -> f64 {
    let d = p - center;
    d.y.atan2(d.x) * 180.0 / PI
}
