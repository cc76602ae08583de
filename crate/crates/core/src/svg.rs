//! Static SVG 1.1 figure of a triangulation, its gradient metric (as vertex
//! radii) and thick paths.

use std::fmt::Write;

use crate::mesh::{tutte_embedding, ArcId, Triangulation};
use crate::numeric::Scalar;
use crate::paths::{Orientation, ThickPath};
use crate::potential::GradientMetric;

const SIZE: f64 = 640.0;
const MARGIN: f64 = 40.0;

fn arc_color(arc: Option<ArcId>) -> &'static str {
    match arc {
        Some(ArcId::P1) => "#8e44ad",
        Some(ArcId::P2) => "#2471a3",
        Some(ArcId::P3) => "#17a589",
        Some(ArcId::P4) => "#c0392b",
        None => "#555555",
    }
}

fn path_color(o: Orientation) -> &'static str {
    match o {
        Orientation::Vertical => "#e67e22",
        Orientation::Horizontal => "#27ae60",
    }
}

/// Renders the triangulation using its coordinates, or a Tutte embedding
/// when it has none.
pub fn render_svg<S: Scalar>(t: &Triangulation, metric: Option<&GradientMetric<S>>, paths: &[&ThickPath<S>]) -> String {
    let raw: Vec<[f64; 2]> = if t.has_positions() {
        t.vertices().iter().map(|v| v.position.unwrap_or([0.0, 0.0])).collect()
    } else {
        tutte_embedding(t)
    };
    let (mut min, mut max) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &raw {
        for k in 0..2 {
            min[k] = min[k].min(p[k]);
            max[k] = max[k].max(p[k]);
        }
    }
    let span = (max[0] - min[0]).max(max[1] - min[1]).max(1e-12);
    let scale = (SIZE - 2.0 * MARGIN) / span;
    // SVG y grows downwards.
    let pos: Vec<[f64; 2]> =
        raw.iter().map(|p| [MARGIN + (p[0] - min[0]) * scale, SIZE - MARGIN - (p[1] - min[1]) * scale]).collect();

    let arc_of = |v: usize| ArcId::ALL.into_iter().find(|&a| t.arc(a).contains(&v));
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);

    let _ = writeln!(out, r##"<g stroke="#b0b0b0" stroke-width="1" fill="none">"##);
    for (a, b) in t.edges() {
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
            pos[a][0], pos[a][1], pos[b][0], pos[b][1]
        );
    }
    let _ = writeln!(out, "</g>");

    for path in paths {
        let points: Vec<String> = path.vertices.iter().map(|&v| format!("{:.2},{:.2}", pos[v][0], pos[v][1])).collect();
        let _ = writeln!(
            out,
            r#"<polyline class="{}" points="{}" fill="none" stroke="{}" stroke-width="4" stroke-linejoin="round" opacity="0.85"/>"#,
            path.orientation,
            points.join(" "),
            path_color(path.orientation)
        );
    }

    let max_rho = metric.map(|m| m.rho.iter().copied().fold(0.0, f64::max)).unwrap_or(0.0);
    let _ = writeln!(out, r#"<g stroke="none">"#);
    for (v, p) in pos.iter().enumerate() {
        let r = match metric {
            Some(m) if max_rho > 0.0 => 2.0 + 10.0 * m.rho[v] / max_rho,
            _ => 3.0,
        };
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="{}"><title>{}</title></circle>"#,
            p[0],
            p[1],
            r,
            arc_color(arc_of(v)),
            escape(t.id(v))
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "</svg>");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
