//! Curve JSON: the contract surface shared by `trop` output and `periods` input.
//! Rationals are strings `"p/q"`.

use std::collections::BTreeSet;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use tropint::plpoly::{LatticePoint, QPoint};
use tropint::puiseux::{parse_q, C64, Q};
use tropint::tropcurve::{
    convex_hull, expanded_genus, graph_genus, Edge, Line, Ray, SegmentData, TropicalCurve, Vertex,
};

pub fn rat(q: Q) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

fn unrat(s: &str) -> Result<Q> {
    parse_q(s).with_context(|| format!("bad rational {s:?}"))
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct VertexJson {
    pub x: String,
    pub y: String,
    pub theta: Vec<[i64; 2]>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct RootJson {
    pub re: f64,
    pub im: f64,
    pub mult: usize,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct SegmentJson {
    pub mult: usize,
    pub vthick: i64,
    pub hthick: i64,
    pub theta: Vec<[i64; 2]>,
    pub roots: Vec<RootJson>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct EdgeJson {
    pub v0: usize,
    pub v1: usize,
    pub primitive: [i64; 2],
    pub length: String,
    #[serde(flatten)]
    pub seg: SegmentJson,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct RayJson {
    pub vertex: usize,
    pub direction: [i64; 2],
    #[serde(flatten)]
    pub seg: SegmentJson,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct LineJson {
    pub x: String,
    pub y: String,
    pub direction: [i64; 2],
    #[serde(flatten)]
    pub seg: SegmentJson,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct CurveJson {
    pub vertices: Vec<VertexJson>,
    pub edges: Vec<EdgeJson>,
    pub rays: Vec<RayJson>,
    #[serde(default)]
    pub lines: Vec<LineJson>,
    pub graph_genus: usize,
    pub expanded_genus: Option<usize>,
}

fn theta_json(t: &BTreeSet<LatticePoint>) -> Vec<[i64; 2]> {
    t.iter().map(|w| [w.w1, w.w2]).collect()
}

fn theta_of(v: &[[i64; 2]]) -> BTreeSet<LatticePoint> {
    v.iter().map(|w| LatticePoint::new(w[0], w[1])).collect()
}

fn seg_json(s: &SegmentData) -> SegmentJson {
    SegmentJson {
        mult: s.mult,
        vthick: s.vthick,
        hthick: s.hthick,
        theta: theta_json(&s.theta),
        roots: s.roots.iter().map(|(z, m)| RootJson { re: z.re, im: z.im, mult: *m }).collect(),
    }
}

fn seg_of(s: &SegmentJson) -> SegmentData {
    SegmentData {
        theta: theta_of(&s.theta),
        vthick: s.vthick,
        hthick: s.hthick,
        mult: s.mult,
        roots: s.roots.iter().map(|r| (C64::new(r.re, r.im), r.mult)).collect(),
    }
}

impl CurveJson {
    pub fn from_curve(t: &TropicalCurve) -> Self {
        Self {
            vertices: t
                .vertices
                .iter()
                .map(|v| VertexJson { x: rat(v.pos.x), y: rat(v.pos.y), theta: theta_json(&v.theta) })
                .collect(),
            edges: t
                .edges
                .iter()
                .map(|e| EdgeJson {
                    v0: e.v0,
                    v1: e.v1,
                    primitive: [e.primitive.0, e.primitive.1],
                    length: rat(e.lattice_length),
                    seg: seg_json(&e.seg),
                })
                .collect(),
            rays: t
                .rays
                .iter()
                .map(|r| RayJson { vertex: r.vertex, direction: [r.direction.0, r.direction.1], seg: seg_json(&r.seg) })
                .collect(),
            lines: t
                .lines
                .iter()
                .map(|l| LineJson {
                    x: rat(l.point.x),
                    y: rat(l.point.y),
                    direction: [l.direction.0, l.direction.1],
                    seg: seg_json(&l.seg),
                })
                .collect(),
            graph_genus: graph_genus(t),
            expanded_genus: expanded_genus(t).ok(),
        }
    }

    pub fn to_curve(&self) -> Result<TropicalCurve> {
        let nv = self.vertices.len();
        let vertices: Vec<Vertex> = self
            .vertices
            .iter()
            .map(|v| Ok(Vertex { pos: QPoint::new(unrat(&v.x)?, unrat(&v.y)?), theta: theta_of(&v.theta) }))
            .collect::<Result<_>>()?;
        let mut edges = Vec::new();
        for e in &self.edges {
            if e.v0 >= nv || e.v1 >= nv {
                bail!("edge refers to a missing vertex");
            }
            edges.push(Edge {
                v0: e.v0,
                v1: e.v1,
                primitive: (e.primitive[0], e.primitive[1]),
                lattice_length: unrat(&e.length)?,
                seg: seg_of(&e.seg),
            });
        }
        let mut rays = Vec::new();
        for r in &self.rays {
            if r.vertex >= nv {
                bail!("ray refers to a missing vertex");
            }
            rays.push(Ray { vertex: r.vertex, direction: (r.direction[0], r.direction[1]), seg: seg_of(&r.seg) });
        }
        let lines = self
            .lines
            .iter()
            .map(|l| {
                Ok(Line {
                    point: QPoint::new(unrat(&l.x)?, unrat(&l.y)?),
                    direction: (l.direction[0], l.direction[1]),
                    seg: seg_of(&l.seg),
                })
            })
            .collect::<Result<_>>()?;
        let dual_cells = vertices.iter().map(|v| convex_hull(&v.theta.iter().copied().collect::<Vec<_>>())).collect();
        Ok(TropicalCurve { vertices, edges, rays, lines, dual_cells })
    }
}
