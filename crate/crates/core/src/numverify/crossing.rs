//! Paths across the sub-surface over a vertex. A monomial driver that is
//! non-constant on every incident cylinder presents the sub-surface as a
//! branched cover of a ζ-strip; sheets over a hub point are connected by
//! loops around branch points and the 2πi translation, found by
//! breadth-first search on the monodromy action.

use std::collections::{BTreeMap, VecDeque};
use std::f64::consts::PI;

use num_traits::Zero;

use super::cycles::CurveContext;
use super::eval::Pt;
use super::track::{completion, correct, points_over, track_polyline, TrackedPath};
use super::NumError;
use crate::cpoly::{self, CPoly};
use crate::plpoly::{self, LatticePoint};
use crate::puiseux::{q_to_f64, C64};

const TAU: f64 = 2.0 * PI;

/// Monodromy data of one vertex at one ε, in hat coordinates `ζ̂ = ζ + offset`.
#[derive(Clone, Debug)]
pub struct Sphere {
    pub vertex: usize,
    pub driver: (i64, i64),
    pub offset: f64,
    pub branch: Vec<C64>,
    pub radii: Vec<f64>,
    pub hub: C64,
    pub sheets: Vec<Pt>,
    /// Closed polylines in `ζ̂` from the hub (loops and the translation).
    pub gens: Vec<Vec<C64>>,
    pub perms: Vec<Vec<usize>>,
}

fn crossing_driver(dirs: &[(i64, i64)]) -> (i64, i64) {
    let mut best: Option<((i64, i64, i64, i64), (i64, i64))> = None;
    for a in -3i64..=3 {
        for b in -3i64..=3 {
            if plpoly::gcd(a, b) != 1 {
                continue;
            }
            let dots: Vec<i64> = dirs.iter().map(|d| a * d.0 + b * d.1).collect();
            if dots.iter().any(|x| *x == 0) {
                continue;
            }
            let key = (dots.iter().map(|x| x.abs()).max().unwrap(), a.abs() + b.abs(), -a, -b);
            if best.map_or(true, |(k, _)| key < k) {
                best = Some((key, (a, b)));
            }
        }
    }
    best.expect("a generic driver exists").1
}

fn seg_dist(p: C64, a: C64, b: C64) -> f64 {
    let ab = b - a;
    let l2 = ab.norm_sqr();
    if l2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * ab.conj()).re / l2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

impl Sphere {
    /// Smallest `distance / radius` from the polyline to any branch disk,
    /// optionally ignoring one branch point.
    fn clearance(&self, poly: &[C64], skip: Option<usize>) -> f64 {
        let mut m = f64::INFINITY;
        for (j, (b, r)) in self.branch.iter().zip(&self.radii).enumerate() {
            for k in -4..=4 {
                if skip == Some(j) && k == 0 {
                    continue;
                }
                let bk = b + C64::new(0.0, TAU * k as f64);
                for w in poly.windows(2) {
                    m = m.min(seg_dist(bk, w[0], w[1]) / r);
                }
            }
        }
        m
    }

    fn loop_around(&self, hub: C64, j: usize) -> (Vec<C64>, usize, f64) {
        // translate of the branch point closest to the hub
        let k = ((hub.im - self.branch[j].im) / TAU).round();
        let b = self.branch[j] + C64::new(0.0, TAU * k);
        let r = self.radii[j];
        let dir = (hub - b) / (hub - b).norm();
        let entry = b + dir * r;
        let mut poly = vec![hub, entry];
        for s in 1..=48 {
            poly.push(b + dir * C64::from_polar(r, TAU * s as f64 / 48.0));
        }
        poly.push(hub);
        let c = self.clearance(&[hub, entry], Some(j)).min(self.clearance(&poly[1..poly.len() - 1], Some(j)).max(0.99));
        (poly, j, c)
    }

    fn hub_score(&self, hub: C64) -> f64 {
        let mut s = self.clearance(&[hub, hub + C64::new(0.0, TAU)], None);
        for j in 0..self.branch.len() {
            s = s.min(self.loop_around(hub, j).2);
        }
        s
    }

    /// Polyline from `z` to some translate of the hub, keeping clear of the
    /// branch disks.
    fn route(&self, z: C64) -> Option<Vec<C64>> {
        let k0 = ((z.im - self.hub.im) / TAU).round();
        let (lo, hi) = self.re_range(&[z]);
        let mut best: Option<(f64, f64, Vec<C64>)> = None;
        let consider = |poly: Vec<C64>, best: &mut Option<(f64, f64, Vec<C64>)>| {
            let c = self.clearance(&poly, None);
            let len: f64 = poly.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
            let better = match best {
                None => true,
                Some((bc, bl, _)) => (c.min(2.0), -len) > (bc.min(2.0), -*bl),
            };
            if better {
                *best = Some((c, len, poly));
            }
        };
        for dk in [0.0, -1.0, 1.0] {
            let target = self.hub + C64::new(0.0, TAU * (k0 + dk));
            consider(vec![z, target], &mut best);
        }
        if best.as_ref().map_or(true, |b| b.0 < 2.0) {
            for dk in [0.0, -1.0, 1.0] {
                let target = self.hub + C64::new(0.0, TAU * (k0 + dk));
                for i in 0..=20 {
                    let re = lo + (hi - lo) * i as f64 / 20.0;
                    for j in 0..16 {
                        let im = target.im - PI + TAU * j as f64 / 16.0;
                        consider(vec![z, C64::new(re, im), target], &mut best);
                    }
                }
            }
        }
        best.filter(|b| b.0 >= 1.0).map(|b| b.2)
    }

    fn re_range(&self, extra: &[C64]) -> (f64, f64) {
        let mut lo = self.hub.re;
        let mut hi = self.hub.re;
        for b in self.branch.iter().chain(extra) {
            lo = lo.min(b.re);
            hi = hi.max(b.re);
        }
        (lo - 0.5, hi + 0.5)
    }
}

fn refine_branch(cx: &CurveContext, driver: (i64, i64), guess: Pt) -> Option<Pt> {
    let (a, b) = (driver.0 as f64, driver.1 as f64);
    let mut p = guess;
    for _ in 0..60 {
        let e = cx.sp.eval(&p);
        let g = e.fy * a - e.fx * b;
        let (j11, j12) = (e.fx, e.fy);
        let (j21, j22) = (e.fxy * a - e.fxx * b, e.fyy * a - e.fxy * b);
        let det = j11 * j22 - j12 * j21;
        if det.norm() < 1e-300 {
            return None;
        }
        let mut dx = (-e.f * j22 + g * j12) / det;
        let mut dy = (-g * j11 + e.f * j21) / det;
        let n = dx.norm().max(dy.norm());
        if !n.is_finite() {
            return None;
        }
        if n > 0.3 {
            dx *= 0.3 / n;
            dy *= 0.3 / n;
        }
        p = Pt::new(p.lx + dx, p.ly + dy);
        if n < 1e-12 {
            break;
        }
    }
    let e = cx.sp.eval(&p);
    let g = e.fy * a - e.fx * b;
    (e.f.norm() < 1e-10 * e.mass && g.norm() < 1e-7 * e.mass).then_some(p)
}

fn reduce(z: C64) -> C64 {
    C64::new(z.re, z.im - TAU * (z.im / TAU).round())
}

pub fn build_sphere(cx: &CurveContext, v: usize) -> Result<Sphere, NumError> {
    let err = |msg: String| NumError::Crossing { vertex: v, msg };
    let eps = cx.ctx.eps;
    let pos = cx.t.vertices[v].pos;
    let (px, py) = (q_to_f64(pos.x), q_to_f64(pos.y));
    let dirs: Vec<(i64, i64)> = cx.t.incident(v).into_iter().map(|x| x.1).collect();
    let driver = crossing_driver(&dirs);
    let (a, b) = driver;
    let (c, d) = completion(driver);
    let offset = (a as f64 * px + b as f64 * py) / eps;
    let soffset = (c as f64 * px + d as f64 * py) / eps;
    let hat_to_pt = |lz: C64, ls: C64| -> Pt {
        let lxh = lz * d as f64 - ls * b as f64;
        let lyh = -(lz * c as f64) + ls * a as f64;
        Pt::new(lxh - px / eps, lyh - py / eps)
    };

    let trunc = plpoly::truncation(&cx.f, &pos);
    let mut terms: BTreeMap<LatticePoint, C64> = BTreeMap::new();
    for (w, coef) in &trunc.main {
        let m = d * w.w1 - c * w.w2;
        let k = a * w.w2 - b * w.w1;
        *terms.entry(LatticePoint::new(m, k)).or_insert(C64::zero()) += coef;
    }
    let model = CPoly::new(terms).normalized();

    let mut branch: Vec<C64> = Vec::new();
    for zb in cpoly::critical_x(&model) {
        let ss = model.y_roots_at(zb);
        let mut best = (f64::INFINITY, C64::zero());
        for i in 0..ss.len() {
            for j in i + 1..ss.len() {
                let dd = (ss[i] - ss[j]).norm();
                if dd < best.0 {
                    best = (dd, 0.5 * (ss[i] + ss[j]));
                }
            }
        }
        let model_z = reduce(zb.ln());
        let z = if best.0.is_finite() && best.1.norm() > 0.0 {
            let guess = hat_to_pt(zb.ln(), best.1.ln());
            match refine_branch(cx, driver, guess) {
                Some(p) => {
                    let zr = reduce(p.mono(a, b) + offset);
                    if reduce(zr - model_z).norm() < 1.0 {
                        zr
                    } else {
                        model_z
                    }
                }
                None => model_z,
            }
        } else {
            model_z
        };
        if !branch.iter().any(|x| reduce(x - z).norm() < 1e-6) {
            branch.push(z);
        }
    }
    let radii: Vec<f64> = (0..branch.len())
        .map(|i| {
            let mut m = TAU;
            for (j, o) in branch.iter().enumerate() {
                for k in -2..=2 {
                    if i == j && k == 0 {
                        continue;
                    }
                    m = m.min((branch[i] - o - C64::new(0.0, TAU * k as f64)).norm());
                }
            }
            (0.3 * m).min(0.5)
        })
        .collect();

    let mut sph = Sphere { vertex: v, driver, offset, branch, radii, hub: C64::zero(), sheets: Vec::new(), gens: Vec::new(), perms: Vec::new() };
    let (lo, hi) = sph.re_range(&[]);
    let (lo, hi) = (lo - 1.0, hi + 1.0);
    let mut best = (f64::NEG_INFINITY, C64::zero());
    for i in 0..=40 {
        let re = lo + (hi - lo) * i as f64 / 40.0;
        for j in 0..24 {
            let hub = C64::new(re, -PI + TAU * (j as f64 + 0.5) / 24.0);
            let s = sph.hub_score(hub).min(3.0) - 1e-3 * (re - 0.5 * (lo + hi)).abs();
            if s > best.0 {
                best = (s, hub);
            }
        }
    }
    if best.0 < 1.05 {
        return Err(err(format!("no hub with clearance (score {:.3})", best.0)));
    }
    sph.hub = best.1;

    // sheets over the hub: model roots refined on C_ε
    let zh = sph.hub.exp();
    let model_s: Vec<C64> = model.y_roots_at(zh).into_iter().filter(|s| s.norm() > 0.0).collect();
    let zeta_h = sph.hub - offset;
    let all = points_over(&cx.sp, driver, zeta_h, C64::new(-soffset, 0.0));
    for s in &model_s {
        let guess = hat_to_pt(sph.hub, s.ln());
        let p = correct(&cx.sp, driver, zeta_h, guess)
            .filter(|p| p.dist(&guess) < 0.3)
            .or_else(|| all.iter().copied().min_by(|x, y| x.dist(&guess).partial_cmp(&y.dist(&guess)).unwrap()))
            .ok_or_else(|| err("no sheet over hub".into()))?;
        if sph.sheets.iter().any(|q| q.dist(&p) < 1e-7) {
            return Err(err("hub sheets collide".into()));
        }
        sph.sheets.push(p);
    }

    let mut gens: Vec<Vec<C64>> = (0..sph.branch.len()).map(|j| sph.loop_around(sph.hub, j).0).collect();
    gens.push(vec![sph.hub, sph.hub + C64::new(0.0, TAU)]);
    for g in &gens {
        let poly: Vec<C64> = g.iter().map(|z| z - offset).collect();
        let mut perm = Vec::new();
        for s in &sph.sheets {
            let path = track_polyline(&cx.sp, &cx.ctx, driver, *s, &poly)?;
            perm.push(sph.match_sheet(&path.end()).ok_or_else(|| err("loop left the sub-surface".into()))?);
        }
        sph.perms.push(perm);
    }
    sph.gens = gens;
    Ok(sph)
}

impl Sphere {
    pub fn match_sheet(&self, p: &Pt) -> Option<usize> {
        let (i, d) = self
            .sheets
            .iter()
            .enumerate()
            .map(|(i, s)| (i, s.dist(p)))
            .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap())?;
        (d < 1e-6).then_some(i)
    }

    /// Shortest generator word (index, forward?) moving sheet `from` to `to`.
    pub fn word(&self, from: usize, to: usize) -> Option<Vec<(usize, bool)>> {
        let n = self.sheets.len();
        let mut prev: Vec<Option<(usize, usize, bool)>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[from] = true;
        let mut q = VecDeque::from([from]);
        while let Some(s) = q.pop_front() {
            if s == to {
                break;
            }
            for (g, perm) in self.perms.iter().enumerate() {
                let inv = perm.iter().position(|&x| x == s).unwrap();
                for (nxt, fwd) in [(perm[s], true), (inv, false)] {
                    if !seen[nxt] {
                        seen[nxt] = true;
                        prev[nxt] = Some((s, g, fwd));
                        q.push_back(nxt);
                    }
                }
            }
        }
        if !seen[to] {
            return None;
        }
        let mut w = Vec::new();
        let mut cur = to;
        while cur != from {
            let (p, g, f) = prev[cur].unwrap();
            w.push((g, f));
            cur = p;
        }
        w.reverse();
        Some(w)
    }
}

/// Path on `C_ε` from `s` to `t`, both near the vertex `v`.
pub fn cross(cx: &CurveContext, sph: &Sphere, s: Pt, t: Pt) -> Result<TrackedPath, NumError> {
    let v = sph.vertex;
    let err = |msg: &str| NumError::Crossing { vertex: v, msg: msg.to_string() };
    let (a, b) = sph.driver;
    let to_hub = |p: Pt| -> Result<(TrackedPath, usize), NumError> {
        let z = p.mono(a, b) + sph.offset;
        let route = sph.route(z).ok_or_else(|| err("no clear route to the hub"))?;
        let poly: Vec<C64> = route.iter().map(|w| w - sph.offset).collect();
        let path = track_polyline(&cx.sp, &cx.ctx, sph.driver, p, &poly)?;
        let k = sph.match_sheet(&path.end()).ok_or_else(|| err("route arrived off the sub-surface"))?;
        Ok((path, k))
    };
    let (mut out, s0) = to_hub(s)?;
    let (back, s1) = to_hub(t)?;
    let word = sph.word(s0, s1).ok_or_else(|| err("sheets not connected"))?;
    for (g, fwd) in word {
        let mut poly: Vec<C64> = sph.gens[g].iter().map(|w| w - sph.offset).collect();
        if !fwd {
            poly.reverse();
        }
        let seg = track_polyline(&cx.sp, &cx.ctx, sph.driver, out.end(), &poly)?;
        out.append(seg)?;
    }
    out.append(back.reversed())?;
    Ok(out)
}
