//! Static SVG of a tropical curve. Presentation only.

use std::fmt::Write;

use tropint::puiseux::q_to_f64;
use tropint::tropcurve::TropicalCurve;

const SIZE: f64 = 480.0;
const PAD: f64 = 0.15;
/// Offset between parallel strokes of a multiple edge, in pixels.
const STROKE_GAP: f64 = 3.0;

struct View {
    x0: f64,
    y1: f64,
    scale: f64,
}

impl View {
    fn px(&self, p: (f64, f64)) -> (f64, f64) {
        ((p.0 - self.x0) * self.scale, (self.y1 - p.1) * self.scale)
    }
}

/// Parallel strokes for a segment of multiplicity `m`.
fn strokes(out: &mut String, a: (f64, f64), b: (f64, f64), m: usize, class: &str) {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let l = dx.hypot(dy).max(1e-12);
    let (nx, ny) = (-dy / l, dx / l);
    for k in 0..m {
        let o = (k as f64 - (m as f64 - 1.0) / 2.0) * STROKE_GAP;
        let _ = writeln!(
            out,
            r#"  <line class="{class}" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
            a.0 + o * nx,
            a.1 + o * ny,
            b.0 + o * nx,
            b.1 + o * ny
        );
    }
}

/// Distance along `d` from `p` to the boundary of `[lo, hi]²`.
fn to_border(p: (f64, f64), d: (f64, f64), lo: (f64, f64), hi: (f64, f64)) -> f64 {
    let mut t = f64::INFINITY;
    for (pi, di, l, h) in [(p.0, d.0, lo.0, hi.0), (p.1, d.1, lo.1, hi.1)] {
        if di > 0.0 {
            t = t.min((h - pi) / di);
        } else if di < 0.0 {
            t = t.min((l - pi) / di);
        }
    }
    t.max(0.0)
}

pub fn render(t: &TropicalCurve) -> String {
    let pts: Vec<(f64, f64)> = t
        .vertices
        .iter()
        .map(|v| (q_to_f64(v.pos.x), q_to_f64(v.pos.y)))
        .chain(t.lines.iter().map(|l| (q_to_f64(l.point.x), q_to_f64(l.point.y))))
        .collect();
    let (mut lo, mut hi) = ((f64::INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::NEG_INFINITY));
    for p in &pts {
        lo = (lo.0.min(p.0), lo.1.min(p.1));
        hi = (hi.0.max(p.0), hi.1.max(p.1));
    }
    if pts.is_empty() {
        lo = (-1.0, -1.0);
        hi = (1.0, 1.0);
    }
    let span = (hi.0 - lo.0).max(hi.1 - lo.1).max(1.0);
    let m = span * PAD + 0.5;
    let (lo, hi) = ((lo.0 - m, lo.1 - m), (hi.0 + m, hi.1 + m));
    let view = View { x0: lo.0, y1: hi.1, scale: SIZE / (hi.0 - lo.0).max(hi.1 - lo.1) };
    let (w, h) = ((hi.0 - lo.0) * view.scale, (hi.1 - lo.1) * view.scale);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.2} {h:.2}">"#);
    let _ = writeln!(s, "  <style>line{{stroke:#222;stroke-width:1.2}} .ray{{stroke:#666}} circle{{fill:#c33}}</style>");
    for e in &t.edges {
        let a = t.vertices[e.v0].pos;
        let b = t.vertices[e.v1].pos;
        let (a, b) = (view.px((q_to_f64(a.x), q_to_f64(a.y))), view.px((q_to_f64(b.x), q_to_f64(b.y))));
        strokes(&mut s, a, b, e.seg.mult, "edge");
    }
    for r in &t.rays {
        let p = t.vertices[r.vertex].pos;
        let p = (q_to_f64(p.x), q_to_f64(p.y));
        let d = (r.direction.0 as f64, r.direction.1 as f64);
        let k = to_border(p, d, lo, hi);
        strokes(&mut s, view.px(p), view.px((p.0 + k * d.0, p.1 + k * d.1)), r.seg.mult, "ray");
    }
    for l in &t.lines {
        let p = (q_to_f64(l.point.x), q_to_f64(l.point.y));
        let d = (l.direction.0 as f64, l.direction.1 as f64);
        let (k1, k2) = (to_border(p, d, lo, hi), to_border(p, (-d.0, -d.1), lo, hi));
        strokes(&mut s, view.px((p.0 - k2 * d.0, p.1 - k2 * d.1)), view.px((p.0 + k1 * d.0, p.1 + k1 * d.1)), l.seg.mult, "ray");
    }
    for v in &t.vertices {
        let (x, y) = view.px((q_to_f64(v.pos.x), q_to_f64(v.pos.y)));
        let _ = writeln!(s, r#"  <circle cx="{x:.2}" cy="{y:.2}" r="3"/>"#);
    }
    s.push_str("</svg>\n");
    s
}
