use super::trace::Trace;
use crate::geom::{Aabb, Point2};
use crate::mechanism::Mechanism;
use std::fmt::Write;

/// CSV with header `t,x,y,link_id,px,py`: one row per sample, traces in
/// order. Numbers use the shortest round-trip decimal form.
pub fn trace_csv(traces: &[Trace]) -> String {
    let mut out = String::from("t,x,y,link_id,px,py\n");
    for tr in traces {
        for s in &tr.samples {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                s.t, s.p.x, s.p.y, tr.point.link.0, tr.point.local.x, tr.point.local.y
            )
            .unwrap();
        }
    }
    out
}

const TRACE_COLORS: [&str; 4] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd"];

/// SVG of the traces drawn over the mechanisms' reference-pose skeletons
/// (one segment between each pair of joint anchors on a link).
pub fn trace_svg(mechs: &[&Mechanism], traces: &[Trace]) -> String {
    let mut segments: Vec<(Point2, Point2, bool)> = Vec::new();
    let mut joints: Vec<Point2> = Vec::new();
    for mech in mechs {
        for link in &mech.links {
            let anchors = mech.anchors_on(link.id);
            let world: Vec<Point2> = anchors
                .iter()
                .map(|(_, p)| link.reference_pose.apply(*p))
                .collect();
            for i in 0..world.len() {
                for k in i + 1..world.len() {
                    segments.push((world[i], world[k], link.is_ground));
                }
            }
        }
        joints.extend(
            mech.joints
                .iter()
                .map(|j| mech.reference_world_anchors(j).0),
        );
    }
    let all = segments
        .iter()
        .flat_map(|(a, b, _)| [*a, *b])
        .chain(joints.iter().copied())
        .chain(traces.iter().flat_map(|t| t.points()))
        .collect::<Vec<_>>();
    let bounds = Aabb::from_points(&all).unwrap_or(Aabb {
        min: Point2::ORIGIN,
        max: Point2::new(1.0, 1.0),
    });
    let pad = 0.05 * bounds.diagonal().max(1e-9);
    let (x0, y0) = (bounds.min.x - pad, bounds.min.y - pad);
    let (w, h) = (
        bounds.max.x - bounds.min.x + 2.0 * pad,
        bounds.max.y - bounds.min.y + 2.0 * pad,
    );
    let stroke = 0.004 * w.max(h);
    // world y points up; flip about the box so the picture is upright
    let fy = |y: f64| bounds.max.y + bounds.min.y - y;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x0} {y0} {w} {h}">"#
    )
    .unwrap();
    writeln!(
        s,
        r##"<g id="skeleton" stroke="#777" stroke-width="{stroke}" fill="none">"##
    )
    .unwrap();
    for (a, b, ground) in &segments {
        let dash = if *ground {
            format!(r#" stroke-dasharray="{} {}""#, 3.0 * stroke, 2.0 * stroke)
        } else {
            String::new()
        };
        writeln!(
            s,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}"{dash}/>"#,
            a.x,
            fy(a.y),
            b.x,
            fy(b.y)
        )
        .unwrap();
    }
    for p in &joints {
        writeln!(
            s,
            r#"<circle cx="{}" cy="{}" r="{}"/>"#,
            p.x,
            fy(p.y),
            3.0 * stroke
        )
        .unwrap();
    }
    writeln!(s, "</g>").unwrap();
    for (k, tr) in traces.iter().enumerate() {
        let pts: Vec<String> = tr
            .points()
            .map(|p| format!("{},{}", p.x, fy(p.y)))
            .collect();
        writeln!(
            s,
            r#"<polyline class="trace" data-link="{}" stroke="{}" stroke-width="{stroke}" fill="none" points="{}"/>"#,
            tr.point.link.0,
            TRACE_COLORS[k % TRACE_COLORS.len()],
            pts.join(" ")
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::kinematics::{Runner, SolverConfig};

    #[test]
    fn csv_rows_round_trip() {
        let mut r = Runner::new(&fixtures::fb1_mechanism(), SolverConfig::default()).unwrap();
        r.run(r.default_dt(), 10).unwrap();
        let csv = trace_csv(&r.traces);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t,x,y,link_id,px,py"));
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 11);
        let first: Vec<f64> = rows[0].split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(first[1], r.traces[0].samples[0].p.x);
        assert_eq!(first[3] as u64, r.traces[0].point.link.0);
    }

    #[test]
    fn svg_has_skeleton_and_trace() {
        let m = fixtures::fb1_mechanism();
        let mut r = Runner::new(&m, SolverConfig::default()).unwrap();
        r.run(r.default_dt(), 20).unwrap();
        let svg = trace_svg(&[&m], &r.traces);
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<line").count(), 4);
        assert_eq!(svg.matches("class=\"trace\"").count(), 1);
    }
}
