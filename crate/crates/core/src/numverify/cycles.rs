//! Concrete cycles on `C_ε` over the tropical curve: α-loops around
//! cylinders, β-paths following a cycle of the expanded graph, and
//! integration of differentials along tracked paths.

use std::sync::OnceLock;

use super::crossing::{build_sphere, cross, Sphere};
use super::eval::{Pt, SPoly};
use super::forms::DifferentialSpec;
use super::quad;
use super::track::{completion, correct, points_over, tangent, track_polyline, TrackedPath};
use super::{EpsilonContext, NumError};
use crate::periods::{MetricGraph, Path};
use crate::plpoly::{ext_gcd, PLPolynomial};
use crate::puiseux::{q_to_f64, C64};
use crate::tropcurve::{expand_multiplicities, tropicalize, Cell, TropicalCurve};

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// Lattice distance along a ray at which its cylinder is seeded.
pub const RAY_REFERENCE: f64 = 1.0;

/// Imaginary part of the hat driver at seeds.
pub const SEED_PHASE: f64 = 1.0;

/// Everything needed to build paths on `C_ε` for one value of ε.
pub struct CurveContext {
    pub f: PLPolynomial,
    pub t: TropicalCurve,
    pub g: MetricGraph,
    pub sp: SPoly,
    pub ctx: EpsilonContext,
    /// Cylinder paths stop at lattice distance `ε·d0` from the vertices.
    pub d0: f64,
    spheres: Vec<OnceLock<Result<Sphere, String>>>,
}

impl CurveContext {
    pub fn new(f: &PLPolynomial, eps: f64) -> Result<Self, NumError> {
        Self::with_junction(f, eps, None)
    }

    /// Junction depth `d0` in log units; by default `min(2, 0.35·ℓ_min/ε)`.
    pub fn with_junction(f: &PLPolynomial, eps: f64, d0: Option<f64>) -> Result<Self, NumError> {
        let ctx = EpsilonContext::new(eps)?;
        let t = tropicalize(f)?;
        let g = expand_multiplicities(&t)?;
        let d0 = d0.unwrap_or_else(|| default_junction(&t, eps));
        let spheres = (0..t.vertices.len()).map(|_| OnceLock::new()).collect();
        Ok(Self { f: f.clone(), sp: SPoly::new(f, eps), t, g, ctx, d0, spheres })
    }

    pub fn eps(&self) -> f64 {
        self.ctx.eps
    }

    pub fn sphere(&self, v: usize) -> Result<&Sphere, NumError> {
        self.spheres[v]
            .get_or_init(|| build_sphere(self, v).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|m| NumError::Crossing { vertex: v, msg: m.clone() })
    }

    /// Start vertex, primitive direction and lattice length of a cell.
    pub fn geometry(&self, c: Cell) -> ((f64, f64), (i64, i64), f64) {
        match c {
            Cell::Edge(i) => {
                let e = &self.t.edges[i];
                let p = self.t.vertices[e.v0].pos;
                ((q_to_f64(p.x), q_to_f64(p.y)), e.primitive, q_to_f64(e.lattice_length))
            }
            Cell::Ray(i) => {
                let r = &self.t.rays[i];
                let p = self.t.vertices[r.vertex].pos;
                ((q_to_f64(p.x), q_to_f64(p.y)), r.direction, f64::INFINITY)
            }
        }
    }

    pub fn point_on(&self, c: Cell, s: f64) -> (f64, f64) {
        let (p, d, _) = self.geometry(c);
        (p.0 + s * d.0 as f64, p.1 + s * d.1 as f64)
    }

    /// Point of the cylinder `(c, copy)` over the tropical point at lattice
    /// distance `s` from the start, with hat driver phase `SEED_PHASE`.
    pub fn seed_at(&self, c: Cell, copy: usize, s: f64) -> Result<Pt, NumError> {
        let (_, dir, _) = self.geometry(c);
        let (a, b) = driver_for(dir);
        let (cc, dd) = completion((a, b));
        let seg = self.t.segment(c);
        let rho = seg.roots.get(copy).ok_or_else(|| NumError::Seed(format!("{c:?} has no copy {copy}")))?.0;
        let (px, py) = self.point_on(c, s);
        let eps = self.eps();
        let lr = rho.ln();
        let ip = C64::new(0.0, SEED_PHASE);
        let guess = Pt::new(ip * dir.0 as f64 - lr * b as f64 - px / eps, ip * dir.1 as f64 + lr * a as f64 - py / eps);
        let zeta = guess.mono(a, b);
        let pts = points_over(&self.sp, (a, b), zeta, guess.mono(cc, dd));
        pts.into_iter()
            .map(|p| (guess.dist(&p), p))
            .filter(|(d, _)| *d < 1.0)
            .min_by(|x, y| x.0.partial_cmp(&y.0).unwrap())
            .map(|x| x.1)
            .ok_or_else(|| NumError::Seed(format!("no point of C_eps near {c:?} copy {copy} at s={s}")))
    }
}

pub fn default_junction(t: &TropicalCurve, eps: f64) -> f64 {
    let lmin = t.edges.iter().map(|e| q_to_f64(e.lattice_length)).fold(f64::INFINITY, f64::min);
    (0.35 * lmin / eps).min(2.0)
}

/// Primitive `(a, b)` with `a·u + b·v = 1`.
pub fn driver_for(dir: (i64, i64)) -> (i64, i64) {
    let (g, s, t) = ext_gcd(dir.0, dir.1);
    debug_assert_eq!(g, 1);
    let (mut a, mut b) = (s * g, t * g);
    // shorten by multiples of the kernel vector (−v, u)
    let (kx, ky) = (-dir.1, dir.0);
    loop {
        let cur = a.abs() + b.abs();
        let (pa, pb) = (a + kx, b + ky);
        let (ma, mb) = (a - kx, b - ky);
        if pa.abs() + pb.abs() < cur {
            (a, b) = (pa, pb);
        } else if ma.abs() + mb.abs() < cur {
            (a, b) = (ma, mb);
        } else {
            break;
        }
    }
    (a, b)
}

/// Path along the cylinder `(c, copy)` from lattice distance `s0` to `s1`
/// (reversed if asked).
pub fn cylinder_path(cx: &CurveContext, c: Cell, copy: usize, reversed: bool, s0: f64, s1: f64) -> Result<TrackedPath, NumError> {
    let (_, dir, len) = cx.geometry(c);
    let driver = driver_for(dir);
    let s_seed = if len.is_finite() { 0.5 * len } else { RAY_REFERENCE.max(s1) };
    let seed = cx.seed_at(c, copy, s_seed)?;
    let z = seed.mono(driver.0, driver.1);
    let eps = cx.eps();
    let at = |s: f64| z - C64::new((s - s_seed) / eps, 0.0);
    let back = track_polyline(&cx.sp, &cx.ctx, driver, seed, &[z, at(s0)])?;
    let fwd = track_polyline(&cx.sp, &cx.ctx, driver, seed, &[z, at(s1)])?;
    let mut path = back.reversed();
    path.append(fwd)?;
    Ok(if reversed { path.reversed() } else { path })
}

/// The loop `α` around the cylinder `(c, copy)` at lattice distance `s`,
/// oriented by the direction `sign·primitive`.
pub fn alpha_cycle(cx: &CurveContext, c: Cell, copy: usize, sign: i64, s: f64) -> Result<TrackedPath, NumError> {
    let (_, dir, _) = cx.geometry(c);
    let dir = (sign * dir.0, sign * dir.1);
    let driver = driver_for(dir);
    let seed = cx.seed_at(c, copy, s)?;
    let z = seed.mono(driver.0, driver.1);
    let mut path = track_polyline(&cx.sp, &cx.ctx, driver, seed, &[z, z + C64::new(0.0, TAU)])?;
    if !path.close(1e-7) {
        return Err(NumError::Tracking { at: seed.trop(cx.eps()), msg: "alpha loop does not close".into() });
    }
    Ok(path)
}

/// Orders the edges of a cycle into a closed walk `(graph edge, forward)`.
pub fn walk(g: &MetricGraph, p: &Path) -> Result<Vec<(usize, bool)>, NumError> {
    let mut left: Vec<(usize, i64)> = p.chain.iter().map(|(e, c)| (*e, *c)).collect();
    if left.iter().any(|(_, c)| c.abs() != 1) || left.is_empty() {
        return Err(NumError::Context("beta path needs a simple cycle".into()));
    }
    let (e0, c0) = left.remove(0);
    let start = if c0 > 0 { g.edges[e0].a } else { g.edges[e0].b };
    let mut at = if c0 > 0 { g.edges[e0].b } else { g.edges[e0].a };
    let mut out = vec![(e0, c0 > 0)];
    while !left.is_empty() {
        let k = left
            .iter()
            .position(|(e, c)| if *c > 0 { g.edges[*e].a == at } else { g.edges[*e].b == at })
            .ok_or_else(|| NumError::Context("cycle chain is not a closed walk".into()))?;
        let (e, c) = left.remove(k);
        at = if c > 0 { g.edges[e].b } else { g.edges[e].a };
        out.push((e, c > 0));
    }
    if at != start {
        return Err(NumError::Context("cycle chain is not closed".into()));
    }
    Ok(out)
}

/// Closed path on `C_ε` following the cycle `p` of the expanded graph.
pub fn beta_path(cx: &CurveContext, p: &Path) -> Result<TrackedPath, NumError> {
    let steps = walk(&cx.g, p)?;
    let eps = cx.eps();
    let mut legs = Vec::new();
    for &(ge, fwd) in &steps {
        let e = &cx.g.edges[ge];
        let len = q_to_f64(e.length);
        let leg = cylinder_path(cx, Cell::Edge(e.edge), e.copy, !fwd, eps * cx.d0, len - eps * cx.d0)?;
        let end_vertex = if fwd { e.b } else { e.a };
        legs.push((leg, end_vertex));
    }
    let n = legs.len();
    let mut out: Option<TrackedPath> = None;
    for i in 0..n {
        let (leg, v) = &legs[i];
        let next_start = legs[(i + 1) % n].0.start();
        let sph = cx.sphere(*v)?;
        let bridge = cross(cx, sph, leg.end(), next_start)?;
        match out.as_mut() {
            None => out = Some(leg.clone()),
            Some(o) => o.append(leg.clone())?,
        }
        out.as_mut().unwrap().append(bridge)?;
    }
    let mut out = out.unwrap();
    if !out.close(1e-7) {
        return Err(NumError::Tracking { at: out.end().trop(eps), msg: "beta path does not close".into() });
    }
    Ok(out)
}

/// `∫_path spec` for every spec, by Gauss–Kronrod quadrature in the driver
/// between consecutive samples.
pub fn integrate_path(cx: &CurveContext, specs: &[&DifferentialSpec], path: &TrackedPath) -> Result<Vec<C64>, NumError> {
    let mut total = vec![C64::new(0.0, 0.0); specs.len()];
    let mut segment = 0usize;
    for piece in &path.pieces {
        let drv = piece.driver;
        for w in piece.samples.windows(2) {
            let ((z0, p0), (z1, p1)) = (w[0], w[1]);
            let dz = z1 - z0;
            if dz.norm() == 0.0 {
                continue;
            }
            let seg = segment;
            let r = quad::integrate(
                |t| {
                    let z = z0 + dz * t;
                    let (base, zb) = if t < 0.5 { (p0, z0) } else { (p1, z1) };
                    let (tx, ty) = tangent(&cx.sp, drv, &base);
                    let pred = Pt::new(base.lx + tx * (z - zb), base.ly + ty * (z - zb));
                    let p = correct(&cx.sp, drv, z, pred).ok_or_else(|| NumError::Quadrature {
                        segment: seg,
                        msg: "node off the curve".into(),
                    })?;
                    let e = cx.sp.eval(&p);
                    Ok::<_, NumError>(specs.iter().map(|s| s.density_at(&e, drv, &p) * dz).collect())
                },
                0.0,
                1.0,
                cx.ctx.quad_tol,
                1e-300,
            )?;
            if !r.converged {
                return Err(NumError::Quadrature { segment: seg, msg: format!("error estimate {:.2e}", r.error) });
            }
            for (acc, v) in total.iter_mut().zip(r.value) {
                *acc += v;
            }
            segment += 1;
        }
    }
    Ok(total)
}

/// `Σ Δ ln y` along the samples, divided by 2πi.
pub fn winding_y(path: &TrackedPath) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for piece in &path.pieces {
        if let (Some(a), Some(b)) = (piece.samples.first(), piece.samples.last()) {
            s += b.1.ly - a.1.ly;
        }
    }
    s / C64::new(0.0, TAU)
}
