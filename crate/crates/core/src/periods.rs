//! Homology of the multiplicity-expanded tropical curve: cycle basis,
//! the signed-length form, the tropical period matrix `B_T`, the directed
//! paths `Γ_E` and their decompositions.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::plpoly::{self, det2, mat_mul, Mat2, PLPolynomial, QPoint};
use crate::puiseux::Q;
use crate::tropcurve::{self, level_functions, LevelFunctions, TropError, TropicalCurve};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PeriodsError {
    #[error("edge {0} is a ray and has infinite length")]
    Unbounded(usize),
    #[error("cycle basis is linearly dependent (rank {rank} < {g})")]
    Dependent { rank: usize, g: usize },
    #[error("period matrix is not positive definite (leading minor {0} is {1})")]
    NotPositive(usize, Q),
    #[error("edge {0} is not vertical in the working frame; apply verticalizing_theta first")]
    NotVertical(usize),
    #[error("no vertical segment of the level data matches edge {0}")]
    NoFloor(usize),
    #[error("cycle {0} has no integral decomposition into Γ̃ paths in any searched frame")]
    NoDecomposition(usize),
    #[error(transparent)]
    Trop(#[from] TropError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphEdge {
    pub a: usize,
    pub b: usize,
    pub length: Q,
    /// Index of the originating curve edge.
    pub edge: usize,
    pub copy: usize,
    pub q: i64,
    pub w: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricGraph {
    pub nodes: Vec<QPoint>,
    pub edges: Vec<GraphEdge>,
}

impl MetricGraph {
    pub fn betti(&self) -> usize {
        let n = self.nodes.len();
        let mut parent: Vec<usize> = (0..n).collect();
        let mut comps = n;
        for e in &self.edges {
            let (ra, rb) = (find(&mut parent, e.a), find(&mut parent, e.b));
            if ra != rb {
                parent[ra] = rb;
                comps -= 1;
            }
        }
        self.edges.len() + comps - n
    }

    pub fn index_of(&self, edge: usize, copy: usize) -> Option<usize> {
        self.edges.iter().position(|e| e.edge == edge && e.copy == copy)
    }
}

fn find(p: &mut [usize], i: usize) -> usize {
    let mut r = i;
    while p[r] != r {
        r = p[r];
    }
    p[i] = r;
    r
}

/// Integer chain on graph edges, plus zero-length markers on `(ray, copy)`
/// recording outward (+1) or inward (−1) traversal of infinite ends.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Path {
    pub chain: BTreeMap<usize, i64>,
    pub ray_markers: BTreeMap<(usize, usize), i64>,
}

impl Path {
    pub fn add_edge(&mut self, e: usize, c: i64) {
        let v = self.chain.entry(e).or_insert(0);
        *v += c;
        if *v == 0 {
            self.chain.remove(&e);
        }
    }

    pub fn add_marker(&mut self, r: (usize, usize), c: i64) {
        let v = self.ray_markers.entry(r).or_insert(0);
        *v += c;
        if *v == 0 {
            self.ray_markers.remove(&r);
        }
    }

    pub fn scaled(&self, s: i64) -> Path {
        let mut p = Path::default();
        for (e, c) in &self.chain {
            p.add_edge(*e, c * s);
        }
        for (r, c) in &self.ray_markers {
            p.add_marker(*r, c * s);
        }
        p
    }

    pub fn plus(&self, o: &Path) -> Path {
        let mut p = self.clone();
        for (e, c) in &o.chain {
            p.add_edge(*e, *c);
        }
        for (r, c) in &o.ray_markers {
            p.add_marker(*r, *c);
        }
        p
    }

    pub fn coeff(&self, e: usize) -> i64 {
        self.chain.get(&e).copied().unwrap_or(0)
    }

    /// Signed node degree; vanishes identically on cycles.
    pub fn boundary(&self, g: &MetricGraph) -> BTreeMap<usize, i64> {
        let mut b = BTreeMap::new();
        for (e, c) in &self.chain {
            *b.entry(g.edges[*e].b).or_insert(0) += c;
            *b.entry(g.edges[*e].a).or_insert(0) -= c;
        }
        b.retain(|_, v| *v != 0);
        b
    }

    pub fn is_cycle(&self, g: &MetricGraph) -> bool {
        self.boundary(g).is_empty() && self.ray_markers.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TropicalPeriodMatrix {
    pub g: usize,
    pub entries: Vec<Vec<Q>>,
}

pub fn lattice_length(t: &TropicalCurve, c: tropcurve::Cell) -> Result<Q, PeriodsError> {
    match c {
        tropcurve::Cell::Edge(i) => Ok(t.edges[i].lattice_length),
        tropcurve::Cell::Ray(i) => Err(PeriodsError::Unbounded(i)),
    }
}

fn edge_key(g: &MetricGraph, i: usize) -> (QPoint, QPoint, usize) {
    let e = &g.edges[i];
    let (p, q) = (g.nodes[e.a], g.nodes[e.b]);
    (p.min(q), p.max(q), e.copy)
}

/// Fundamental cycles of a spanning forest built by Kruskal over the
/// lexicographic edge order (min endpoint, max endpoint, copy). Cycle `j`
/// runs along the tree from `a` to `b` and returns over the non-tree edge.
pub fn cycle_basis(g: &MetricGraph) -> Vec<Path> {
    let mut order: Vec<usize> = (0..g.edges.len()).collect();
    order.sort_by_key(|&i| edge_key(g, i));
    let n = g.nodes.len();
    let mut parent: Vec<usize> = (0..n).collect();
    let mut tree: Vec<usize> = Vec::new();
    let mut extra: Vec<usize> = Vec::new();
    for &i in &order {
        let (ra, rb) = (find(&mut parent, g.edges[i].a), find(&mut parent, g.edges[i].b));
        if ra == rb {
            extra.push(i);
        } else {
            parent[ra] = rb;
            tree.push(i);
        }
    }
    extra
        .iter()
        .map(|&j| {
            let e = &g.edges[j];
            let mut p = tree_path(g, &tree, e.a, e.b);
            p.add_edge(j, -1);
            p
        })
        .collect()
}

/// Directed chain along the tree from `from` to `to`.
fn tree_path(g: &MetricGraph, tree: &[usize], from: usize, to: usize) -> Path {
    // depth-first search over tree edges
    let mut prev: BTreeMap<usize, (usize, i64)> = BTreeMap::new();
    let mut stack = vec![from];
    let mut seen = vec![false; g.nodes.len()];
    seen[from] = true;
    while let Some(v) = stack.pop() {
        for &t in tree {
            let e = &g.edges[t];
            let (next, sign) = if e.a == v {
                (e.b, 1)
            } else if e.b == v {
                (e.a, -1)
            } else {
                continue;
            };
            if !seen[next] {
                seen[next] = true;
                prev.insert(next, (t, sign));
                stack.push(next);
            }
        }
    }
    let mut p = Path::default();
    let mut v = to;
    while v != from {
        let (t, s) = prev[&v];
        p.add_edge(t, s);
        v = if s == 1 { g.edges[t].a } else { g.edges[t].b };
    }
    p
}

pub fn path_length_form(g: &MetricGraph, a: &Path, b: &Path) -> Q {
    a.chain
        .iter()
        .filter_map(|(e, c)| b.chain.get(e).map(|d| Q::from_integer(c * d) * g.edges[*e].length))
        .fold(Q::zero(), |s, v| s + v)
}

/// Exact rank of integer vectors by fraction-free elimination over ℚ.
pub fn rank(rows: &[Vec<Q>]) -> usize {
    let mut m: Vec<Vec<Q>> = rows.to_vec();
    let cols = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c] / m[r][c];
                for k in 0..cols {
                    let v = m[r][k];
                    m[i][k] -= f * v;
                }
            }
        }
        r += 1;
    }
    r
}

pub fn determinant(a: &[Vec<Q>]) -> Q {
    let n = a.len();
    let mut m = a.to_vec();
    let mut det = Q::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else { return Q::zero() };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= m[c][c];
        for i in c + 1..n {
            let f = m[i][c] / m[c][c];
            for k in c..n {
                let v = m[c][k];
                m[i][k] -= f * v;
            }
        }
    }
    det
}

pub fn period_matrix(g: &MetricGraph, basis: &[Path]) -> Result<TropicalPeriodMatrix, PeriodsError> {
    let n = basis.len();
    let rows: Vec<Vec<Q>> =
        basis.iter().map(|p| (0..g.edges.len()).map(|e| Q::from_integer(p.coeff(e))).collect()).collect();
    let r = rank(&rows);
    if r < n {
        return Err(PeriodsError::Dependent { rank: r, g: n });
    }
    let entries: Vec<Vec<Q>> =
        (0..n).map(|i| (0..n).map(|j| path_length_form(g, &basis[i], &basis[j])).collect()).collect();
    for k in 1..=n {
        let minor: Vec<Vec<Q>> = entries[..k].iter().map(|r| r[..k].to_vec()).collect();
        let d = determinant(&minor);
        if d <= Q::zero() {
            return Err(PeriodsError::NotPositive(k, d));
        }
    }
    Ok(TropicalPeriodMatrix { g: n, entries })
}

/// α-marker on a graph edge with orientation sign `s`: `(α(e, s) ∘ Γ) = s·Γ(e)`.
pub fn intersection_number(marker: (usize, i64), path: &Path) -> i64 {
    marker.1 * path.coeff(marker.0)
}

/// α-markers dual to `cycle_basis`: `(α_j ∘ T_i) = δ_ij`.
pub fn alpha_markers(basis: &[Path], g: &MetricGraph) -> Vec<(usize, i64)> {
    let mut order: Vec<usize> = (0..g.edges.len()).collect();
    order.sort_by_key(|&i| edge_key(g, i));
    basis
        .iter()
        .map(|p| {
            // the non-tree edge is the last edge in lexicographic order carrying −1
            let e = *order.iter().rev().find(|e| p.coeff(**e) == -1).unwrap();
            (e, -1)
        })
        .collect()
}

// ------------------------------------------------------ working frames

/// The curve, polynomial and level data after `X ↦ θX`.
#[derive(Clone, Debug)]
pub struct WorkingFrame {
    pub theta: Mat2,
    pub poly: PLPolynomial,
    /// Exponent shift `(a, b)`: `poly = x^a y^b · (f∘θ)`.
    pub shift: (i64, i64),
    pub curve: TropicalCurve,
    pub level: LevelFunctions,
}

impl WorkingFrame {
    pub fn new(f: &PLPolynomial, t: &TropicalCurve, theta: Mat2) -> Result<Self, PeriodsError> {
        let g = plpoly::affine_transform_poly(f, &theta).map_err(TropError::from)?;
        let (poly, shift) = g.normalized_exponents();
        let curve = tropcurve::affine_transform_curve(t, &theta)?;
        let level = level_functions(&poly)?;
        Ok(Self { theta, poly, shift, curve, level })
    }

    pub fn is_vertical(&self, e: usize) -> bool {
        self.curve.edges[e].primitive.0 == 0
    }

    /// Whether a non-vertical bounded edge lies on the graph of 𝒩_i.
    pub fn edge_on_graph(&self, e: usize, i: usize) -> bool {
        !self.is_vertical(e) && self.level.level(i, self.curve.edge_midpoint(e).x) == Some(self.curve.edge_midpoint(e).y)
    }

    pub fn ray_on_graph(&self, r: usize, i: usize) -> bool {
        let ray = &self.curve.rays[r];
        if ray.direction.0 == 0 {
            return false;
        }
        let p = self.curve.ray_point(r, Q::one());
        self.level.level(i, p.x) == Some(p.y)
    }

    /// Floor index `I` of a vertical bounded edge.
    pub fn floor_of(&self, e: usize) -> Result<usize, PeriodsError> {
        if !self.is_vertical(e) {
            return Err(PeriodsError::NotVertical(e));
        }
        let ed = &self.curve.edges[e];
        let (p0, p1) = (self.curve.vertices[ed.v0].pos, self.curve.vertices[ed.v1].pos);
        let (lo, hi) = (p0.y.min(p1.y), p0.y.max(p1.y));
        self.level
            .vertical
            .iter()
            .find(|l| l.x == p0.x && l.y0 == Some(lo) && l.y1 == Some(hi))
            .map(|l| l.coeff)
            .ok_or(PeriodsError::NoFloor(e))
    }

    /// Lower and upper endpoints of a vertical edge.
    pub fn vertical_ends(&self, e: usize) -> (QPoint, QPoint) {
        let ed = &self.curve.edges[e];
        let (p0, p1) = (self.curve.vertices[ed.v0].pos, self.curve.vertices[ed.v1].pos);
        if p0.y <= p1.y {
            (p0, p1)
        } else {
            (p1, p0)
        }
    }
}

/// Directed Γ_E: rightward along G_I up to the floor of `E`, up `E`, then
/// leftward along G_{I+1}.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaPath {
    pub frame: Mat2,
    pub edge: usize,
    pub copy: usize,
    pub floor: usize,
    /// Signed coefficients on curve edges (unexpanded).
    pub unexpanded: BTreeMap<usize, i64>,
    /// Signed outward markers on rays (unexpanded).
    pub rays: BTreeMap<usize, i64>,
    /// Γ̃_E on the expanded graph: copy 0 of every other multi-edge.
    pub tilde: Path,
    /// Multi-edges other than `E` crossed by Γ_E with traversal sign, for the
    /// υ corrections.
    pub upsilon: Vec<(usize, i64)>,
}

pub fn gamma_path(
    fr: &WorkingFrame,
    g: &MetricGraph,
    edge: usize,
    copy: usize,
) -> Result<GammaPath, PeriodsError> {
    let floor = fr.floor_of(edge)?;
    let (lo, _) = fr.vertical_ends(edge);
    let xb = lo.x;
    let c = &fr.curve;
    let mut unexpanded: BTreeMap<usize, i64> = BTreeMap::new();
    let mut rays: BTreeMap<usize, i64> = BTreeMap::new();
    let add = |m: &mut BTreeMap<usize, i64>, k: usize, v: i64| {
        let e = m.entry(k).or_insert(0);
        *e += v;
        if *e == 0 {
            m.remove(&k);
        }
    };
    for (level, dir) in [(floor, 1i64), (floor + 1, -1i64)] {
        for (i, ed) in c.edges.iter().enumerate() {
            let mid = c.edge_midpoint(i);
            if mid.x < xb && fr.edge_on_graph(i, level) {
                let rightward = if ed.primitive.0 > 0 { 1 } else { -1 };
                add(&mut unexpanded, i, dir * rightward);
            }
        }
        for (r, ray) in c.rays.iter().enumerate() {
            if ray.direction.0 < 0 && c.vertices[ray.vertex].pos.x <= xb && fr.ray_on_graph(r, level) {
                // the floor is entered from its left end, the ceiling exits there
                add(&mut rays, r, dir * -1);
            }
        }
    }
    let up = if c.edges[edge].primitive.1 > 0 { 1 } else { -1 };
    add(&mut unexpanded, edge, up);

    let mut tilde = Path::default();
    let mut upsilon = Vec::new();
    for (&e, &v) in &unexpanded {
        let k = if e == edge { copy } else { 0 };
        tilde.add_edge(g.index_of(e, k).unwrap(), v);
        if e != edge && c.edges[e].seg.mult > 1 {
            upsilon.push((e, v));
        }
    }
    for (&r, &v) in &rays {
        tilde.add_marker((r, 0), v);
    }
    Ok(GammaPath { frame: fr.theta, edge, copy, floor, unexpanded, rays, tilde, upsilon })
}

/// Γ̃_E; identical to the expanded chain stored on the Γ path.
pub fn tilde_gamma(gp: &GammaPath) -> &Path {
    &gp.tilde
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub frame: Mat2,
    /// `(Γ_E, s)` with `cycle = Σ s·Γ̃_E`.
    pub terms: Vec<(GammaPath, i64)>,
}

/// Frames tried in order: identity, then for each bounded edge the
/// verticalizing θ and its negative.
pub fn candidate_frames(t: &TropicalCurve) -> Vec<Mat2> {
    let mut out: Vec<Mat2> = vec![[[1, 0], [0, 1]]];
    for e in &t.edges {
        let th = tropcurve::verticalizing_theta(e.primitive);
        let neg = mat_mul(&[[-1, 0], [0, -1]], &th);
        for m in [th, neg] {
            if !out.contains(&m) {
                out.push(m);
            }
        }
    }
    debug_assert!(out.iter().all(|m| det2(m) == 1));
    out
}

fn solve_rational(a: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut m: Vec<Vec<Q>> = a.iter().zip(b).map(|(r, v)| r.iter().copied().chain([*v]).collect()).collect();
    let mut piv = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let d = m[r][c];
        for k in 0..=cols {
            m[r][k] /= d;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c];
                for k in 0..=cols {
                    let v = m[r][k];
                    m[i][k] -= f * v;
                }
            }
        }
        piv.push(c);
        r += 1;
    }
    if (r..rows).any(|i| !m[i][cols].is_zero()) {
        return None;
    }
    let mut x = vec![Q::zero(); cols];
    for (i, &c) in piv.iter().enumerate() {
        x[c] = m[i][cols];
    }
    Some(x)
}

/// Writes a basis cycle as an integer combination of Γ̃ paths of vertical
/// edges, searching the candidate frames in order.
pub fn decompose_cycle(
    f: &PLPolynomial,
    t: &TropicalCurve,
    g: &MetricGraph,
    cycle: &Path,
    index: usize,
) -> Result<Decomposition, PeriodsError> {
    let nr = t.rays.len();
    let ne = g.edges.len();
    let coord = |p: &Path| -> Vec<Q> {
        let mut v: Vec<Q> = (0..ne).map(|e| Q::from_integer(p.coeff(e))).collect();
        for r in 0..nr {
            let s: i64 = p.ray_markers.iter().filter(|((rr, _), _)| *rr == r).map(|(_, c)| *c).sum();
            v.push(Q::from_integer(s));
        }
        v
    };
    let target = coord(cycle);
    for theta in candidate_frames(t) {
        let fr = WorkingFrame::new(f, t, theta)?;
        let mut cands = Vec::new();
        for e in 0..t.edges.len() {
            if !fr.is_vertical(e) {
                continue;
            }
            for copy in 0..t.edges[e].seg.mult {
                if let Ok(gp) = gamma_path(&fr, g, e, copy) {
                    cands.push(gp);
                }
            }
        }
        if cands.is_empty() {
            continue;
        }
        let cols: Vec<Vec<Q>> = cands.iter().map(|c| coord(&c.tilde)).collect();
        let a: Vec<Vec<Q>> = (0..target.len()).map(|r| cols.iter().map(|c| c[r]).collect()).collect();
        let Some(x) = solve_rational(&a, &target) else { continue };
        if x.iter().any(|v| !v.is_integer()) {
            continue;
        }
        let terms: Vec<(GammaPath, i64)> = cands
            .into_iter()
            .zip(x)
            .filter(|(_, s)| !s.is_zero())
            .map(|(c, s)| (c, s.to_integer()))
            .collect();
        return Ok(Decomposition { frame: theta, terms });
    }
    Err(PeriodsError::NoDecomposition(index))
}

/// Lattice length from the identity `ℓ = (gcd(q, w)/q)·(X₁ − X₀)` on a non-vertical edge.
pub fn slope_length(t: &TropicalCurve, e: usize) -> Option<Q> {
    let ed = &t.edges[e];
    let q = ed.seg.vthick;
    if ed.primitive.0 == 0 || q == 0 {
        return None;
    }
    let xi = q.gcd(&ed.seg.hthick);
    let (x0, x1) = (t.vertices[ed.v0].pos.x, t.vertices[ed.v1].pos.x);
    Some(Q::new(xi, q) * (x1 - x0).abs())
}
