//! Tropical plane curves `TV(f_ε)` via the regular subdivision of the
//! valuation-lifted support, with thickness, multiplicity, level functions,
//! genus and the good-tropicalization predicate.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use num_traits::Zero;
use thiserror::Error;

use crate::cpoly::{self, CPoly};
use crate::periods::{GraphEdge, MetricGraph};
use crate::plpoly::{
    self, as_y_polynomial, coefficient_root_data, default_root_order, ext_gcd, genericness_check, LatticePoint,
    Mat2, PLPolynomial, PlError, QPoint,
};
use crate::puiseux::{C64, Q};
use crate::roots;

/// Relative tolerance for clustering the roots of an edge reduction.
pub const MULT_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TropError {
    #[error("support is a single monomial; the tropical curve is empty")]
    SingleMonomial,
    #[error("ambiguous root clustering on a dual segment (relative gap {gap:e})")]
    AmbiguousClustering { gap: f64 },
    #[error("multiplicity {m} does not divide thickness ({q}, {w})")]
    Indivisible { m: usize, q: i64, w: i64 },
    #[error("edge {0} is not vertical in the working frame")]
    NotVertical(usize),
    #[error(transparent)]
    Pl(#[from] PlError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Vertex {
    pub pos: QPoint,
    pub theta: BTreeSet<LatticePoint>,
}

/// Data attached to a one-dimensional cell: its dual segment and the roots of
/// the univariate reduction `g` with `f^P = x^w0 · g(x^-v y^u)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentData {
    pub theta: BTreeSet<LatticePoint>,
    pub vthick: i64,
    pub hthick: i64,
    pub mult: usize,
    /// Distinct roots of `g` with multiplicities, sorted by (re, im).
    pub roots: Vec<(C64, usize)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub v0: usize,
    pub v1: usize,
    /// Primitive vector pointing from `v0` to `v1`.
    pub primitive: (i64, i64),
    pub lattice_length: Q,
    pub seg: SegmentData,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ray {
    pub vertex: usize,
    pub direction: (i64, i64),
    pub seg: SegmentData,
}

/// A full line, arising only when the support is collinear.
#[derive(Clone, Debug, PartialEq)]
pub struct Line {
    pub point: QPoint,
    pub direction: (i64, i64),
    pub seg: SegmentData,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TropicalCurve {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    pub rays: Vec<Ray>,
    pub lines: Vec<Line>,
    /// Convex hull of Θ(vertex), counter-clockwise.
    pub dual_cells: Vec<Vec<LatticePoint>>,
}

fn qi(n: i64) -> Q {
    Q::from_integer(n)
}

fn cross(o: LatticePoint, a: LatticePoint, b: LatticePoint) -> i64 {
    (a.w1 - o.w1) * (b.w2 - o.w2) - (a.w2 - o.w2) * (b.w1 - o.w1)
}

/// Strict convex hull (no collinear boundary points), counter-clockwise.
pub fn convex_hull(pts: &[LatticePoint]) -> Vec<LatticePoint> {
    let mut p: Vec<LatticePoint> = pts.to_vec();
    p.sort();
    p.dedup();
    if p.len() <= 2 {
        return p;
    }
    let mut lower: Vec<LatticePoint> = Vec::new();
    for &q in &p {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], q) <= 0 {
            lower.pop();
        }
        lower.push(q);
    }
    let mut upper: Vec<LatticePoint> = Vec::new();
    for &q in p.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], q) <= 0 {
            upper.pop();
        }
        upper.push(q);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

pub fn primitive_of(a: i64, b: i64) -> (i64, i64) {
    let g = a.gcd(&b);
    if g == 0 {
        (0, 0)
    } else {
        (a / g, b / g)
    }
}

/// Lattice length of an integer segment.
pub fn segment_lattice_length(a: LatticePoint, b: LatticePoint) -> i64 {
    (b.w1 - a.w1).gcd(&(b.w2 - a.w2))
}

fn segment_data(f: &PLPolynomial, theta: BTreeSet<LatticePoint>, dir: (i64, i64)) -> Result<SegmentData, TropError> {
    let w1s = theta.iter().map(|w| w.w1);
    let w2s = theta.iter().map(|w| w.w2);
    let hthick = w1s.clone().max().unwrap() - w1s.min().unwrap();
    let vthick = w2s.clone().max().unwrap() - w2s.min().unwrap();
    let delta = (-dir.1, dir.0);
    let dd = delta.0 * delta.0 + delta.1 * delta.1;
    let dot = |w: &LatticePoint| w.w1 * delta.0 + w.w2 * delta.1;
    let w0 = *theta.iter().min_by_key(|w| dot(w)).unwrap();
    let deg = theta.iter().map(|w| (dot(w) - dot(&w0)) / dd).max().unwrap() as usize;
    let mut g = vec![C64::new(0.0, 0.0); deg + 1];
    for w in &theta {
        let k = ((dot(w) - dot(&w0)) / dd) as usize;
        g[k] = f.coeffs[w].leading_coeff().map_err(PlError::from)?;
    }
    let rts = roots::poly_roots(&g);
    let cl = roots::cluster(&rts, MULT_TOL);
    let gap = roots::min_relative_gap(&cl);
    if gap < 100.0 * MULT_TOL {
        return Err(TropError::AmbiguousClustering { gap });
    }
    let roots: Vec<(C64, usize)> = cl
        .into_iter()
        .map(|(z, m)| if m > 1 { (roots::polish_multiple(&g, z, m), m) } else { (z, m) })
        .collect();
    Ok(SegmentData { theta, vthick, hthick, mult: roots.len(), roots })
}

struct Face {
    pts: BTreeSet<usize>,
    vertex: QPoint,
}

fn lower_faces(support: &[(LatticePoint, Q)]) -> Vec<Face> {
    let n = support.len();
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut faces = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let (a, b, c) = (support[i].0, support[j].0, support[k].0);
                let det = cross(a, b, c);
                if det == 0 {
                    continue;
                }
                // h(w) = c0 + g1 w1 + g2 w2 through the three lifted points
                let (ha, hb, hc) = (support[i].1, support[j].1, support[k].1);
                let (u1, u2, du) = (qi(b.w1 - a.w1), qi(b.w2 - a.w2), hb - ha);
                let (v1, v2, dv) = (qi(c.w1 - a.w1), qi(c.w2 - a.w2), hc - ha);
                let d = qi(det);
                let g1 = (du * v2 - dv * u2) / d;
                let g2 = (u1 * dv - v1 * du) / d;
                let c0 = ha - g1 * qi(a.w1) - g2 * qi(a.w2);
                let plane = |w: LatticePoint| c0 + g1 * qi(w.w1) + g2 * qi(w.w2);
                if support.iter().any(|(w, h)| *h < plane(*w)) {
                    continue;
                }
                let pts: BTreeSet<usize> = (0..n).filter(|&t| support[t].1 == plane(support[t].0)).collect();
                let key: Vec<usize> = pts.iter().copied().collect();
                if seen.insert(key) {
                    faces.push(Face { pts, vertex: QPoint::new(-g1, -g2) });
                }
            }
        }
    }
    faces
}

/// Tropical curve of `f` from the lower hull of `{(w, val a_w)}`.
pub fn tropicalize(f: &PLPolynomial) -> Result<TropicalCurve, TropError> {
    if f.is_zero() {
        return Err(PlError::ZeroPolynomial.into());
    }
    let support: Vec<(LatticePoint, Q)> = f.coeffs.iter().map(|(w, c)| (*w, c.val().unwrap())).collect();
    if support.len() == 1 {
        return Err(TropError::SingleMonomial);
    }
    let mut faces = lower_faces(&support);
    if faces.is_empty() {
        return collinear_curve(f, &support);
    }
    faces.sort_by(|a, b| a.vertex.cmp(&b.vertex));
    let vertices: Vec<Vertex> = faces
        .iter()
        .map(|fc| Vertex { pos: fc.vertex, theta: fc.pts.iter().map(|&t| support[t].0).collect() })
        .collect();
    let dual_cells = vertices.iter().map(|v| convex_hull(&v.theta.iter().copied().collect::<Vec<_>>())).collect();

    let mut edges = Vec::new();
    for a in 0..faces.len() {
        for b in a + 1..faces.len() {
            let shared: BTreeSet<usize> = faces[a].pts.intersection(&faces[b].pts).copied().collect();
            if shared.len() < 2 {
                continue;
            }
            let theta: BTreeSet<LatticePoint> = shared.iter().map(|&t| support[t].0).collect();
            let (p0, p1) = (faces[a].vertex, faces[b].vertex);
            let (dx, dy) = (p1.x - p0.x, p1.y - p0.y);
            let den = dx.denom().lcm(dy.denom());
            let (ix, iy) = ((dx * qi(den)).to_integer(), (dy * qi(den)).to_integer());
            let prim = primitive_of(ix, iy);
            let len = if prim.0 != 0 { dx / qi(prim.0) } else { dy / qi(prim.1) };
            let seg = segment_data(f, theta, prim)?;
            edges.push(Edge { v0: a, v1: b, primitive: prim, lattice_length: len, seg });
        }
    }

    let mut rays = Vec::new();
    for (fi, fc) in faces.iter().enumerate() {
        let pts: Vec<LatticePoint> = fc.pts.iter().map(|&t| support[t].0).collect();
        let hull = convex_hull(&pts);
        for h in 0..hull.len() {
            let (pa, pb) = (hull[h], hull[(h + 1) % hull.len()]);
            let on_seg: BTreeSet<usize> =
                fc.pts.iter().copied().filter(|&t| cross(pa, pb, support[t].0) == 0).collect();
            let shared = faces
                .iter()
                .enumerate()
                .any(|(o, of)| o != fi && on_seg.iter().filter(|t| of.pts.contains(t)).count() >= 2);
            if shared {
                continue;
            }
            let d = primitive_of(pb.w1 - pa.w1, pb.w2 - pa.w2);
            let mut r = (-d.1, d.0);
            let off = pts.iter().find(|w| cross(pa, pb, **w) != 0).unwrap();
            if (off.w1 - pa.w1) * r.0 + (off.w2 - pa.w2) * r.1 < 0 {
                r = (-r.0, -r.1);
            }
            let theta = on_seg.iter().map(|&t| support[t].0).collect();
            let seg = segment_data(f, theta, r)?;
            rays.push(Ray { vertex: fi, direction: r, seg });
        }
    }
    rays.sort_by(|a, b| (a.vertex, a.direction).cmp(&(b.vertex, b.direction)));
    Ok(TropicalCurve { vertices, edges, rays, lines: Vec::new(), dual_cells })
}

fn collinear_curve(f: &PLPolynomial, support: &[(LatticePoint, Q)]) -> Result<TropicalCurve, TropError> {
    let base = support[0].0;
    let far = support.iter().map(|s| s.0).max_by_key(|w| (w.w1 - base.w1).abs() + (w.w2 - base.w2).abs()).unwrap();
    let d = primitive_of(far.w1 - base.w1, far.w2 - base.w2);
    let k_of = |w: LatticePoint| if d.0 != 0 { (w.w1 - base.w1) / d.0 } else { (w.w2 - base.w2) / d.1 };
    let mut pts: Vec<(i64, Q, LatticePoint)> = support.iter().map(|(w, h)| (k_of(*w), *h, *w)).collect();
    pts.sort_by(|a, b| a.0.cmp(&b.0));
    // lower chain of (k, h)
    let mut hull: Vec<(i64, Q, LatticePoint)> = Vec::new();
    for p in pts.iter() {
        while hull.len() >= 2 {
            let a = &hull[hull.len() - 2];
            let b = &hull[hull.len() - 1];
            let lhs = (b.1 - a.1) * qi(p.0 - a.0);
            let rhs = (p.1 - a.1) * qi(b.0 - a.0);
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(*p);
    }
    let dd = qi(d.0 * d.0 + d.1 * d.1);
    let mut lines = Vec::new();
    for w in hull.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let slope = (b.1 - a.1) / qi(b.0 - a.0);
        // points X with d·X = -slope
        let s = -slope / dd;
        let point = QPoint::new(s * qi(d.0), s * qi(d.1));
        let on: BTreeSet<LatticePoint> = pts
            .iter()
            .filter(|p| p.0 >= a.0 && p.0 <= b.0 && p.1 == a.1 + slope * qi(p.0 - a.0))
            .map(|p| p.2)
            .collect();
        let dir = (-d.1, d.0);
        let seg = segment_data(f, on, dir)?;
        lines.push(Line { point, direction: dir, seg });
    }
    Ok(TropicalCurve { vertices: Vec::new(), edges: Vec::new(), rays: Vec::new(), lines, dual_cells: Vec::new() })
}

pub fn vertical_thickness(seg: &SegmentData) -> i64 {
    seg.vthick
}

pub fn horizontal_thickness(seg: &SegmentData) -> i64 {
    seg.hthick
}

pub fn multiplicity(seg: &SegmentData) -> usize {
    seg.mult
}

impl TropicalCurve {
    pub fn edge_midpoint(&self, e: usize) -> QPoint {
        let (a, b) = (self.vertices[self.edges[e].v0].pos, self.vertices[self.edges[e].v1].pos);
        QPoint::new((a.x + b.x) / qi(2), (a.y + b.y) / qi(2))
    }

    /// Point at lattice distance `t` along a ray.
    pub fn ray_point(&self, r: usize, t: Q) -> QPoint {
        let ray = &self.rays[r];
        let p = self.vertices[ray.vertex].pos;
        QPoint::new(p.x + t * qi(ray.direction.0), p.y + t * qi(ray.direction.1))
    }

    /// Edge indices incident to a vertex together with the outgoing primitive.
    pub fn incident(&self, v: usize) -> Vec<(Cell, (i64, i64))> {
        let mut out = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if e.v0 == v {
                out.push((Cell::Edge(i), e.primitive));
            }
            if e.v1 == v {
                out.push((Cell::Edge(i), (-e.primitive.0, -e.primitive.1)));
            }
        }
        for (i, r) in self.rays.iter().enumerate() {
            if r.vertex == v {
                out.push((Cell::Ray(i), r.direction));
            }
        }
        out
    }

    pub fn segment(&self, c: Cell) -> &SegmentData {
        match c {
            Cell::Edge(i) => &self.edges[i].seg,
            Cell::Ray(i) => &self.rays[i].seg,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cell {
    Edge(usize),
    Ray(usize),
}

// ------------------------------------------------------ level functions

/// Piecewise-linear function of X given by knots and end slopes.
#[derive(Clone, Debug, PartialEq)]
pub struct PlFunction {
    pub knots: Vec<(Q, Q)>,
    pub slope_left: Q,
    pub slope_right: Q,
}

impl PlFunction {
    pub fn eval(&self, x: Q) -> Q {
        let k = &self.knots;
        if x <= k[0].0 {
            return k[0].1 + self.slope_left * (x - k[0].0);
        }
        let last = k[k.len() - 1];
        if x >= last.0 {
            return last.1 + self.slope_right * (x - last.0);
        }
        for w in k.windows(2) {
            if x <= w[1].0 {
                let s = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
                return w[0].1 + s * (x - w[0].0);
            }
        }
        unreachable!()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerticalSegment {
    /// Coefficient index `i` of `a_i`.
    pub coeff: usize,
    /// Root index `j` within `coefficient_root_data(a_i)`.
    pub root: usize,
    pub x: Q,
    /// `None` means −∞.
    pub y0: Option<Q>,
    /// `None` means +∞.
    pub y1: Option<Q>,
    pub unit: C64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelFunctions {
    pub n: usize,
    /// `graphs[i-1]` is 𝒩_i; `None` when identically +∞.
    pub graphs: Vec<Option<PlFunction>>,
    pub vertical: Vec<VerticalSegment>,
    /// Linear pieces `(k, val)` of `F_i(X) = min_k val + kX`; empty when `a_i = 0`.
    pub pieces: Vec<Vec<(i64, Q)>>,
}

impl LevelFunctions {
    pub fn f_val(&self, i: usize, x: Q) -> Option<Q> {
        self.pieces[i].iter().map(|(k, v)| *v + qi(*k) * x).min()
    }

    /// 𝒩_i(X) for `1 ≤ i ≤ N`, evaluated exactly from the coefficients.
    pub fn level_exact(&self, i: usize, x: Q) -> Option<Q> {
        let mut best: Option<Q> = None;
        for k in i..=self.n {
            let Some(fk) = self.f_val(k, x) else { continue };
            let mut worst: Option<Q> = None;
            for j in 0..i {
                let Some(fj) = self.f_val(j, x) else { continue };
                let s = (fk - fj) / qi((k - j) as i64);
                worst = Some(worst.map_or(s, |w: Q| w.max(s)));
            }
            if let Some(w) = worst {
                best = Some(best.map_or(w, |b: Q| b.min(w)));
            }
        }
        best
    }

    /// 𝒩_i with the conventions 𝒩_0 = −∞ and 𝒩_{N+1} = +∞ (`None`).
    pub fn level(&self, i: usize, x: Q) -> Option<Q> {
        if i == 0 || i > self.n {
            return None;
        }
        self.graphs[i - 1].as_ref().map(|g| g.eval(x))
    }

    /// Indices `i` whose graph passes through `(x, y)`.
    pub fn graphs_through(&self, p: QPoint) -> Vec<usize> {
        (1..=self.n).filter(|&i| self.level(i, p.x) == Some(p.y)).collect()
    }
}

/// Floor and ceiling graph indices of a vertical segment.
pub fn ceiling_floor(l: &VerticalSegment) -> (usize, usize) {
    (l.coeff + 1, l.coeff)
}

pub fn level_functions(f: &PLPolynomial) -> Result<LevelFunctions, TropError> {
    let a = as_y_polynomial(f)?;
    let n = a.len() - 1;
    let pieces: Vec<Vec<(i64, Q)>> = a
        .iter()
        .map(|ai| ai.coeffs.iter().enumerate().filter_map(|(k, c)| c.val().map(|v| (k as i64, v))).collect())
        .collect();
    let mut cand: BTreeSet<Q> = BTreeSet::new();
    let sup: Vec<(LatticePoint, Q)> = f.coeffs.iter().map(|(w, c)| (*w, c.val().unwrap())).collect();
    for s in 0..sup.len() {
        for t in s + 1..sup.len() {
            let (a1, b1) = (sup[s].0, sup[t].0);
            if a1.w2 == b1.w2 && a1.w1 != b1.w1 {
                cand.insert((sup[s].1 - sup[t].1) / qi(b1.w1 - a1.w1));
            }
            for u in t + 1..sup.len() {
                let c1 = sup[u].0;
                let det = cross(a1, b1, c1);
                if det == 0 {
                    continue;
                }
                // solve (b-a)·X = h_a - h_b, (c-a)·X = h_a - h_c
                let (r1, r2) = (sup[s].1 - sup[t].1, sup[s].1 - sup[u].1);
                let x = (r1 * qi(c1.w2 - a1.w2) - r2 * qi(b1.w2 - a1.w2)) / qi(det);
                cand.insert(x);
            }
        }
    }
    if cand.is_empty() {
        cand.insert(Q::zero());
    }
    let mut lf = LevelFunctions { n, graphs: Vec::new(), vertical: Vec::new(), pieces };
    let xs: Vec<Q> = cand.into_iter().collect();
    for i in 1..=n {
        if lf.level_exact(i, xs[0]).is_none() {
            lf.graphs.push(None);
            continue;
        }
        let mut knots: Vec<(Q, Q)> = xs.iter().map(|&x| (x, lf.level_exact(i, x).unwrap())).collect();
        let x0 = knots[0].0;
        let xl = knots[knots.len() - 1].0;
        let slope_left = knots[0].1 - lf.level_exact(i, x0 - qi(1)).unwrap();
        let slope_right = lf.level_exact(i, xl + qi(1)).unwrap() - knots[knots.len() - 1].1;
        let mut k = 1;
        while k + 1 < knots.len() {
            let (p, q, r) = (knots[k - 1], knots[k], knots[k + 1]);
            if (q.1 - p.1) * (r.0 - q.0) == (r.1 - q.1) * (q.0 - p.0) {
                knots.remove(k);
            } else {
                k += 1;
            }
        }
        lf.graphs.push(Some(PlFunction { knots, slope_left, slope_right }));
    }
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        let data = coefficient_root_data(ai, default_root_order(ai))?;
        for (j, (b, u)) in data.roots.iter().enumerate() {
            lf.vertical.push(VerticalSegment {
                coeff: i,
                root: j,
                x: *b,
                y0: lf.level(i, *b),
                y1: lf.level(i + 1, *b),
                unit: *u,
            });
        }
    }
    Ok(lf)
}

// ------------------------------------------------ regularity and genus

/// Every dual 2-cell is a triangle (collinear boundary points allowed).
pub fn is_regular(t: &TropicalCurve) -> bool {
    t.dual_cells.iter().all(|c| c.len() == 3)
}

/// `|Θ| = 3` at vertices and `|Θ| = 2` on edges and rays.
pub fn is_regular_literal(t: &TropicalCurve) -> bool {
    t.vertices.iter().all(|v| v.theta.len() == 3)
        && t.edges.iter().all(|e| e.seg.theta.len() == 2)
        && t.rays.iter().all(|r| r.seg.theta.len() == 2)
        && t.lines.iter().all(|l| l.seg.theta.len() == 2)
}

fn components(n: usize, pairs: impl Iterator<Item = (usize, usize)>) -> usize {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for (a, b) in pairs {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra] = rb;
    }
    (0..n).filter(|&i| find(&mut parent, i) == i).count()
}

pub fn graph_genus(t: &TropicalCurve) -> usize {
    let v = t.vertices.len();
    let c = components(v, t.edges.iter().map(|e| (e.v0, e.v1)));
    t.edges.len() + c - v
}

pub fn expand_multiplicities(t: &TropicalCurve) -> Result<MetricGraph, TropError> {
    let mut edges = Vec::new();
    for (i, e) in t.edges.iter().enumerate() {
        let m = e.seg.mult;
        if e.seg.vthick % m as i64 != 0 || e.seg.hthick % m as i64 != 0 {
            return Err(TropError::Indivisible { m, q: e.seg.vthick, w: e.seg.hthick });
        }
        for copy in 0..m {
            edges.push(GraphEdge {
                a: e.v0,
                b: e.v1,
                length: e.lattice_length,
                edge: i,
                copy,
                q: e.seg.vthick / m as i64,
                w: e.seg.hthick / m as i64,
            });
        }
    }
    Ok(MetricGraph { nodes: t.vertices.iter().map(|v| v.pos).collect(), edges })
}

pub fn expanded_genus(t: &TropicalCurve) -> Result<usize, TropError> {
    Ok(expand_multiplicities(t)?.betti())
}

// ----------------------------------------------------------- sub-surfaces

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SubsurfaceReport {
    pub genus_zero: bool,
    pub irreducible: bool,
}

fn truncation_cpoly(f: &PLPolynomial, theta: &BTreeSet<LatticePoint>) -> CPoly {
    CPoly::new(theta.iter().map(|w| (*w, f.coeffs[w].leading_coeff().unwrap())).collect())
}

/// Interior lattice points of a lattice polygon via Pick's theorem.
pub fn interior_points(hull: &[LatticePoint]) -> i64 {
    if hull.len() < 3 {
        return 0;
    }
    let n = hull.len();
    let mut area2 = 0;
    let mut boundary = 0;
    for i in 0..n {
        let (a, b) = (hull[i], hull[(i + 1) % n]);
        area2 += a.w1 * b.w2 - a.w2 * b.w1;
        boundary += segment_lattice_length(a, b);
    }
    (area2.abs() - boundary + 2) / 2
}

pub fn subsurface_of(f: &PLPolynomial, theta: &BTreeSet<LatticePoint>) -> SubsurfaceReport {
    let pts: Vec<LatticePoint> = theta.iter().copied().collect();
    let hull = convex_hull(&pts);
    if hull.len() < 3 {
        let len = segment_lattice_length(hull[0], hull[hull.len() - 1]);
        return SubsurfaceReport { genus_zero: true, irreducible: len == 1 };
    }
    let genus_zero = interior_points(&hull) == 0;
    let n = hull.len();
    let g = (0..n).fold(0, |g, i| g.gcd(&segment_lattice_length(hull[i], hull[(i + 1) % n])));
    let irreducible = if n == 3 && g == 1 {
        true
    } else {
        cpoly::is_irreducible(&truncation_cpoly(f, theta)).unwrap_or(false)
    };
    SubsurfaceReport { genus_zero, irreducible }
}

pub fn subsurface_check(f: &PLPolynomial, t: &TropicalCurve, vertex: usize) -> SubsurfaceReport {
    subsurface_of(f, &t.vertices[vertex].theta)
}

// --------------------------------------------------- good tropicalization

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionResult {
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GoodTropReport {
    pub pass: bool,
    pub conditions: BTreeMap<String, ConditionResult>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct GoodTropConfig {
    pub strict_genericness: bool,
    /// ε for the finite-ε smoothness probe; skipped when `None`.
    pub probe_eps: Option<f64>,
}

/// Per-copy thicknesses `(q_k, w_k)` of a dual segment: a root of multiplicity
/// μ contributes μ·|primitive|.
pub fn copy_thicknesses(seg: &SegmentData) -> Vec<(i64, i64)> {
    let deg: usize = seg.roots.iter().map(|r| r.1).sum();
    let (q1, w1) = (seg.vthick / deg as i64, seg.hthick / deg as i64);
    seg.roots.iter().map(|(_, m)| (q1 * *m as i64, w1 * *m as i64)).collect()
}

pub fn condition_one(seg: &SegmentData) -> bool {
    seg.mult as i64 == seg.vthick.gcd(&seg.hthick)
}

pub fn condition_two(seg: &SegmentData) -> bool {
    let c = copy_thicknesses(seg);
    c.windows(2).all(|p| p[0] == p[1])
}

fn all_segments(t: &TropicalCurve) -> Vec<(String, &SegmentData)> {
    let mut v: Vec<(String, &SegmentData)> = Vec::new();
    v.extend(t.edges.iter().enumerate().map(|(i, e)| (format!("edge {}", i), &e.seg)));
    v.extend(t.rays.iter().enumerate().map(|(i, r)| (format!("ray {}", i), &r.seg)));
    v.extend(t.lines.iter().enumerate().map(|(i, l)| (format!("line {}", i), &l.seg)));
    v
}

/// Finite-ε probe: the rescaled polynomial around every vertex has no torus
/// singularity.
pub fn smoothness_probe(f: &PLPolynomial, t: &TropicalCurve, eps: f64) -> Vec<usize> {
    let mut bad = Vec::new();
    for (i, v) in t.vertices.iter().enumerate() {
        let g = plpoly::q_transform(f, &v.pos);
        let val = plpoly::tropical_val(f, &v.pos);
        let terms: BTreeMap<LatticePoint, C64> = g
            .coeffs
            .iter()
            .filter_map(|(w, c)| {
                let s = c.shift(-val);
                let z = s.eval_at(eps);
                (z.norm() > 1e-14).then_some((*w, z))
            })
            .collect();
        if !cpoly::torus_singular_points(&CPoly::new(terms)).is_empty() {
            bad.push(i);
        }
    }
    bad
}

pub fn good_tropicalization_check(f: &PLPolynomial, cfg: GoodTropConfig) -> Result<GoodTropReport, TropError> {
    let t = tropicalize(f)?;
    let mut conditions = BTreeMap::new();
    let gen = genericness_check(f, cfg.strict_genericness)?;
    let detail = if gen.pass {
        if gen.literal_pass {
            "all leading units of coefficient roots distinct".to_string()
        } else {
            "per-level units distinct; literal global reading fails".to_string()
        }
    } else {
        format!("{} coincident leading unit(s)", gen.violations.len())
    };
    conditions.insert("genericness".into(), ConditionResult { pass: gen.pass, detail });

    let sing: Vec<usize> = t
        .vertices
        .iter()
        .enumerate()
        .filter(|(_, v)| !cpoly::torus_singular_points(&truncation_cpoly(f, &v.theta)).is_empty())
        .map(|(i, _)| i)
        .collect();
    let mut probe = Vec::new();
    if let Some(eps) = cfg.probe_eps {
        probe = smoothness_probe(f, &t, eps);
    }
    conditions.insert(
        "smoothness".into(),
        ConditionResult {
            pass: sing.is_empty() && probe.is_empty(),
            detail: if sing.is_empty() && probe.is_empty() {
                "vertex truncations smooth in the torus".into()
            } else {
                format!("singular truncation at vertices {:?}, probe {:?}", sing, probe)
            },
        },
    );

    let degenerate: Vec<usize> = (0..t.vertices.len())
        .filter(|&i| {
            let s = subsurface_check(f, &t, i);
            !(s.genus_zero && s.irreducible)
        })
        .collect();
    conditions.insert(
        "non_degeneracy".into(),
        ConditionResult {
            pass: degenerate.is_empty(),
            detail: if degenerate.is_empty() {
                "every vertex sub-surface is an irreducible sphere".into()
            } else {
                format!("vertices {:?} fail", degenerate)
            },
        },
    );

    let reg = is_regular(&t);
    conditions.insert(
        "regularity".into(),
        ConditionResult {
            pass: reg,
            detail: if reg { "all dual cells are triangles".into() } else { "non-triangular dual cell".into() },
        },
    );

    let segs = all_segments(&t);
    let c1: Vec<&String> = segs.iter().filter(|(_, s)| !condition_one(s)).map(|(n, _)| n).collect();
    let c2: Vec<&String> = segs.iter().filter(|(_, s)| !condition_two(s)).map(|(n, _)| n).collect();
    conditions.insert(
        "condition_I".into(),
        ConditionResult {
            pass: c1.is_empty(),
            detail: if c1.is_empty() { "m = gcd(q, w) everywhere".into() } else { format!("fails on {:?}", c1) },
        },
    );
    conditions.insert(
        "condition_II".into(),
        ConditionResult {
            pass: c2.is_empty(),
            detail: if c2.is_empty() { "copy thicknesses equal".into() } else { format!("fails on {:?}", c2) },
        },
    );
    let pass = conditions.values().all(|c| c.pass);
    Ok(GoodTropReport { pass, conditions })
}

// ------------------------------------------------------------ SL₂ frames

fn apply(theta: &Mat2, p: QPoint) -> QPoint {
    QPoint::new(
        qi(theta[0][0]) * p.x + qi(theta[0][1]) * p.y,
        qi(theta[1][0]) * p.x + qi(theta[1][1]) * p.y,
    )
}

fn apply_dir(theta: &Mat2, d: (i64, i64)) -> (i64, i64) {
    (theta[0][0] * d.0 + theta[0][1] * d.1, theta[1][0] * d.0 + theta[1][1] * d.1)
}

/// Image of the curve under `X ↦ θX`. Vertex order and indices are kept;
/// edge primitives, ray directions and Θ-sets are transformed.
pub fn affine_transform_curve(t: &TropicalCurve, theta: &Mat2) -> Result<TropicalCurve, TropError> {
    let d = plpoly::det2(theta);
    if d != 1 {
        return Err(PlError::Determinant(d).into());
    }
    let tw = |s: &BTreeSet<LatticePoint>| -> BTreeSet<LatticePoint> {
        s.iter().map(|w| plpoly::dual_action(theta, *w)).collect()
    };
    let tseg = |s: &SegmentData| -> SegmentData {
        let th = tw(&s.theta);
        let w1 = th.iter().map(|w| w.w1);
        let w2 = th.iter().map(|w| w.w2);
        SegmentData {
            hthick: w1.clone().max().unwrap() - w1.min().unwrap(),
            vthick: w2.clone().max().unwrap() - w2.min().unwrap(),
            theta: th,
            mult: s.mult,
            roots: s.roots.clone(),
        }
    };
    Ok(TropicalCurve {
        vertices: t.vertices.iter().map(|v| Vertex { pos: apply(theta, v.pos), theta: tw(&v.theta) }).collect(),
        edges: t
            .edges
            .iter()
            .map(|e| Edge {
                v0: e.v0,
                v1: e.v1,
                primitive: apply_dir(theta, e.primitive),
                lattice_length: e.lattice_length,
                seg: tseg(&e.seg),
            })
            .collect(),
        rays: t
            .rays
            .iter()
            .map(|r| Ray { vertex: r.vertex, direction: apply_dir(theta, r.direction), seg: tseg(&r.seg) })
            .collect(),
        lines: t
            .lines
            .iter()
            .map(|l| Line { point: apply(theta, l.point), direction: apply_dir(theta, l.direction), seg: tseg(&l.seg) })
            .collect(),
        dual_cells: t
            .dual_cells
            .iter()
            .map(|c| convex_hull(&c.iter().map(|w| plpoly::dual_action(theta, *w)).collect::<Vec<_>>()))
            .collect(),
    })
}

/// `[[v, -u], [w, z]]` with `wu + zv = 1`; sends `(u, v)` to `(0, 1)`.
pub fn verticalizing_theta(primitive: (i64, i64)) -> Mat2 {
    let (u, v) = primitive;
    let (_, s, t) = ext_gcd(u, v);
    [[v, -u], [s, t]]
}

/// Bounded check that an integer matrix lies in SL₂(ℤ).
pub fn is_unimodular(m: &Mat2) -> bool {
    plpoly::det2(m) == 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plpoly::parse;
    use crate::puiseux::q;

    const EX1: &str = "(x+e)*y^2+(x+e^2)*(x+e^3)*y+e^8";
    const EX2: &str = "y^3+(x+e^4)*y^2+e^2*(x+e)*(x+2*e)*y+e^10";

    fn pt(x: Q, y: Q) -> QPoint {
        QPoint::new(x, y)
    }

    #[test]
    fn example_one_vertices_and_cells() {
        let t = tropicalize(&parse(EX1).unwrap()).unwrap();
        let v: Vec<QPoint> = t.vertices.iter().map(|v| v.pos).collect();
        assert_eq!(v, vec![pt(qi(1), qi(1)), pt(qi(2), qi(3)), pt(qi(2), qi(4)), pt(q(5, 2), q(7, 2))]);
        assert_eq!(t.edges.len(), 4);
        assert_eq!(t.rays.len(), 4);
        assert_eq!(graph_genus(&t), 1);
        let horns: usize = t.rays.iter().map(|r| r.seg.mult).sum();
        assert_eq!(horns, 5);
    }

    #[test]
    fn example_one_edges() {
        let t = tropicalize(&parse(EX1).unwrap()).unwrap();
        let find = |a: usize, b: usize| t.edges.iter().find(|e| e.v0 == a && e.v1 == b).unwrap();
        // α=0, γ=1, β=2, δ=3
        assert_eq!(find(0, 1).primitive, (1, 2));
        assert_eq!(find(0, 1).lattice_length, qi(1));
        assert_eq!(find(1, 2).primitive, (0, 1));
        assert_eq!(find(1, 2).seg.vthick, 0);
        assert_eq!(find(1, 2).seg.hthick, 1);
        assert_eq!(find(1, 3).lattice_length, q(1, 2));
        assert_eq!(find(2, 3).lattice_length, q(1, 2));
        assert!(t.edges.iter().all(|e| e.seg.mult == 1));
        let down = t.rays.iter().find(|r| r.vertex == 0 && r.direction == (0, -1)).unwrap();
        assert_eq!(down.seg.mult, 1);
        let right = t.rays.iter().find(|r| r.vertex == 3).unwrap();
        assert_eq!(right.direction, (1, 0));
        assert_eq!(right.seg.mult, 2);
    }

    #[test]
    fn example_two_vertices_multiplicity() {
        let f = parse(EX2).unwrap();
        let t = tropicalize(&f).unwrap();
        let v: Vec<QPoint> = t.vertices.iter().map(|v| v.pos).collect();
        assert_eq!(v, vec![pt(qi(1), qi(3)), pt(qi(1), qi(6)), pt(qi(2), qi(2))]);
        let ab = t.edges.iter().find(|e| e.v0 == 0 && e.v1 == 1).unwrap();
        assert_eq!(ab.seg.mult, 2);
        assert_eq!(ab.seg.hthick, 2);
        assert_eq!(ab.seg.vthick, 0);
        assert_eq!(ab.lattice_length, qi(3));
        assert_eq!(graph_genus(&t), 0);
        assert_eq!(expanded_genus(&t).unwrap(), 1);
        let g = expand_multiplicities(&t).unwrap();
        assert_eq!(g.edges.iter().filter(|e| e.edge == 0 || e.edge == 1).count(), 3);
    }

    #[test]
    fn binomial_is_a_line() {
        let t = tropicalize(&parse("x + y").unwrap()).unwrap();
        assert!(t.vertices.is_empty());
        assert_eq!(t.lines.len(), 1);
        assert_eq!(t.lines[0].direction.0.abs(), 1);
        assert_eq!(t.lines[0].direction.0, t.lines[0].direction.1);
        assert!(matches!(tropicalize(&parse("e*x^2*y").unwrap()), Err(TropError::SingleMonomial)));
        let t2 = tropicalize(&parse("x^2 + 3*x*e + 2*e^2").unwrap()).unwrap();
        assert_eq!(t2.lines.len(), 1);
        assert_eq!(t2.lines[0].seg.mult, 2);
        assert_eq!(t2.lines[0].point.x, qi(1));
    }

    #[test]
    fn level_function_values() {
        let f = parse(EX1).unwrap();
        let lf = level_functions(&f).unwrap();
        assert_eq!(lf.level(1, qi(2)), Some(qi(3)));
        assert_eq!(lf.level(2, qi(2)), Some(qi(4)));
        assert_eq!(lf.level(1, qi(3)), lf.level(2, qi(3)));
        let l11 = lf.vertical.iter().find(|l| l.coeff == 1 && l.x == qi(2)).unwrap();
        assert_eq!((l11.y0, l11.y1), (Some(qi(3)), Some(qi(4))));
        assert_eq!(ceiling_floor(l11), (2, 1));
        let l0 = lf.vertical.iter().find(|l| l.coeff == 0).unwrap();
        assert_eq!((l0.x, l0.y0, l0.y1), (qi(1), None, Some(qi(1))));
        for x in [-3, 0, 1, 2, 5] {
            for i in 1..=2 {
                assert_eq!(lf.level(i, qi(x)), lf.level_exact(i, qi(x)));
            }
        }
    }

    #[test]
    fn level_functions_example_two() {
        let lf = level_functions(&parse(EX2).unwrap()).unwrap();
        let ls: Vec<&VerticalSegment> = lf.vertical.iter().filter(|l| l.coeff == 2).collect();
        assert_eq!(ls.len(), 2);
        for l in ls {
            assert_eq!((l.x, l.y0, l.y1), (qi(1), Some(qi(3)), Some(qi(6))));
        }
    }

    #[test]
    fn regularity() {
        let t1 = tropicalize(&parse(EX1).unwrap()).unwrap();
        assert!(is_regular(&t1));
        assert!(is_regular_literal(&t1));
        let t2 = tropicalize(&parse(EX2).unwrap()).unwrap();
        assert!(is_regular(&t2));
        assert!(!is_regular_literal(&t2));
        let sq = tropicalize(&parse("x*y+x+y+1").unwrap()).unwrap();
        assert!(!is_regular(&sq));
        assert_eq!(sq.vertices[0].theta.len(), 4);
        // lifting the diagonal corners splits the square into two triangles
        let split = tropicalize(&parse("e*x*y+x+y+e").unwrap()).unwrap();
        assert!(is_regular(&split));
        assert_eq!(split.vertices.len(), 2);
    }

    #[test]
    fn subsurfaces() {
        let f = parse(EX1).unwrap();
        let t = tropicalize(&f).unwrap();
        for i in 0..t.vertices.len() {
            assert_eq!(subsurface_check(&f, &t, i), SubsurfaceReport { genus_zero: true, irreducible: true });
        }
        let g = parse(EX2).unwrap();
        let tg = tropicalize(&g).unwrap();
        let gamma = tg.vertices.iter().position(|v| v.pos == QPoint::ints(2, 2)).unwrap();
        assert_eq!(subsurface_check(&g, &tg, gamma), SubsurfaceReport { genus_zero: true, irreducible: true });
        let ab = &tg.edges.iter().find(|e| e.seg.mult == 2).unwrap().seg;
        assert!(!subsurface_of(&g, &ab.theta).irreducible);
        let cubic = parse("x^3+y^3+1").unwrap();
        let tc = tropicalize(&cubic).unwrap();
        assert!(!subsurface_check(&cubic, &tc, 0).genus_zero);
    }

    #[test]
    fn good_tropicalization() {
        for s in [EX1, EX2] {
            let r = good_tropicalization_check(&parse(s).unwrap(), GoodTropConfig::default()).unwrap();
            assert!(r.pass, "{:?}", r);
        }
        let bad = parse("y^2 + x*y + (x+e)*(x+e)").unwrap();
        let r = good_tropicalization_check(&bad, GoodTropConfig::default()).unwrap();
        assert!(!r.conditions["genericness"].pass);
    }

    #[test]
    fn verticalizing() {
        assert_eq!(verticalizing_theta((1, 1)), [[1, -1], [0, 1]]);
        for d in [(1, 2), (2, -3), (-1, 0), (5, 7), (0, 1)] {
            let th = verticalizing_theta(d);
            assert!(is_unimodular(&th));
            assert_eq!(apply_dir(&th, d), (0, 1));
        }
    }

    #[test]
    fn transform_keeps_lengths() {
        let t = tropicalize(&parse(EX1).unwrap()).unwrap();
        let th = [[2, 1], [1, 1]];
        let tt = affine_transform_curve(&t, &th).unwrap();
        for (a, b) in t.edges.iter().zip(tt.edges.iter()) {
            assert_eq!(a.lattice_length, b.lattice_length);
        }
        assert_eq!(affine_transform_curve(&t, &[[1, 0], [0, 1]]).unwrap(), t);
        let direct = tropicalize(&plpoly::affine_transform_poly(&parse(EX1).unwrap(), &th).unwrap()).unwrap();
        let mut a: Vec<QPoint> = tt.vertices.iter().map(|v| v.pos).collect();
        a.sort();
        let b: Vec<QPoint> = direct.vertices.iter().map(|v| v.pos).collect();
        assert_eq!(a, b);
    }
}
