//! Predictor–corrector continuation of points on `C_ε` along a prescribed
//! path of a monomial driver `ζ = a·ln x + b·ln y`.

use num_traits::Zero;

use super::eval::{log_sum, Pt, SPoly};
use super::{EpsilonContext, NumError};
use crate::plpoly::ext_gcd;
use crate::puiseux::C64;
use crate::roots;

/// Samples of one continuation run under a fixed driver.
#[derive(Clone, Debug)]
pub struct Piece {
    pub driver: (i64, i64),
    /// `(ζ, point)` with `ζ = a·lx + b·ly` at the point.
    pub samples: Vec<(C64, Pt)>,
}

impl Piece {
    pub fn start(&self) -> Pt {
        self.samples[0].1
    }

    pub fn end(&self) -> Pt {
        self.samples.last().unwrap().1
    }

    pub fn reversed(&self) -> Piece {
        let mut s = self.samples.clone();
        s.reverse();
        Piece { driver: self.driver, samples: s }
    }
}

/// A continuous path on `C_ε`, possibly switching drivers between pieces.
#[derive(Clone, Debug)]
pub struct TrackedPath {
    pub pieces: Vec<Piece>,
    pub closed: bool,
    pub eps: f64,
    /// Smallest sheet separation met while tracking.
    pub min_separation: f64,
}

impl TrackedPath {
    pub fn from_piece(p: Piece, eps: f64, sep: f64) -> Self {
        Self { pieces: vec![p], closed: false, eps, min_separation: sep }
    }

    pub fn start(&self) -> Pt {
        self.pieces[0].start()
    }

    pub fn end(&self) -> Pt {
        self.pieces.last().unwrap().end()
    }

    /// Appends `o`, which must start where `self` ends.
    pub fn append(&mut self, o: TrackedPath) -> Result<(), NumError> {
        if !self.pieces.is_empty() {
            let gap = self.end().dist(&o.start());
            if gap > 1e-7 {
                return Err(NumError::Tracking { at: self.end().trop(self.eps), msg: format!("gap {gap:.2e} between pieces") });
            }
        }
        self.pieces.extend(o.pieces);
        self.min_separation = self.min_separation.min(o.min_separation);
        Ok(())
    }

    pub fn reversed(&self) -> TrackedPath {
        TrackedPath {
            pieces: self.pieces.iter().rev().map(Piece::reversed).collect(),
            closed: self.closed,
            eps: self.eps,
            min_separation: self.min_separation,
        }
    }

    /// Marks the path closed if it returns to its start.
    pub fn close(&mut self, tol: f64) -> bool {
        self.closed = self.start().dist(&self.end()) < tol;
        self.closed
    }

    pub fn len(&self) -> usize {
        self.pieces.iter().map(|p| p.samples.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(t, x, y)` with `t` the normalised sample index.
    pub fn samples(&self) -> Vec<(f64, C64, C64)> {
        let pts: Vec<Pt> = self.pieces.iter().flat_map(|p| p.samples.iter().map(|s| s.1)).collect();
        let n = (pts.len().max(2) - 1) as f64;
        pts.iter().enumerate().map(|(i, p)| (i as f64 / n, p.x(), p.y())).collect()
    }

    /// Tropical shadow of every sample.
    pub fn shadow(&self) -> Vec<(f64, f64)> {
        self.pieces.iter().flat_map(|p| p.samples.iter().map(|s| s.1.trop(self.eps))).collect()
    }
}

fn det(driver: (i64, i64), fx: C64, fy: C64) -> C64 {
    fy * driver.0 as f64 - fx * driver.1 as f64
}

/// `d(lx, ly)/dζ` along the curve.
pub fn tangent(sp: &SPoly, driver: (i64, i64), p: &Pt) -> (C64, C64) {
    let e = sp.eval(p);
    let d = det(driver, e.fx, e.fy);
    (e.fy / d, -e.fx / d)
}

/// Newton correction onto `{f = 0, a·lx + b·ly = ζ}`. Rejects
/// non-contracting iterations.
pub fn correct(sp: &SPoly, driver: (i64, i64), zeta: C64, p0: Pt) -> Option<Pt> {
    let (a, b) = (driver.0 as f64, driver.1 as f64);
    let mut p = p0;
    let mut prev = f64::INFINITY;
    for it in 0..12 {
        let e = sp.eval(&p);
        let g1 = zeta - p.mono(driver.0, driver.1);
        let g2 = -e.f;
        let d = det(driver, e.fx, e.fy);
        if d.norm() < 1e-300 {
            return None;
        }
        let dlx = (g1 * e.fy - g2 * b) / d;
        let dly = (g2 * a - g1 * e.fx) / d;
        let n = dlx.norm().max(dly.norm());
        if !n.is_finite() || (it > 1 && n > 0.5 * prev + 1e-13) {
            return None;
        }
        p = Pt::new(p.lx + dlx, p.ly + dly);
        prev = n;
        if n < 1e-13 * (1.0 + p.lx.norm().max(p.ly.norm())) {
            let e = sp.eval(&p);
            return (e.f.norm() <= 1e-10 * e.mass).then_some(p);
        }
    }
    let e = sp.eval(&p);
    (prev < 1e-9 && e.f.norm() <= 1e-10 * e.mass).then_some(p)
}

/// Completion `(c, d)` of a primitive driver to an SL₂ matrix.
pub fn completion(driver: (i64, i64)) -> (i64, i64) {
    let (g, s, t) = ext_gcd(driver.0, driver.1);
    debug_assert_eq!(g.abs(), 1);
    (-t * g, s * g)
}

/// All points of `C_ε` with driver value `zeta`, found as roots of `f` in the
/// complementary coordinate `s = x^c y^d` rescaled around `ls_center`.
pub fn points_over(sp: &SPoly, driver: (i64, i64), zeta: C64, ls_center: C64) -> Vec<Pt> {
    let (a, b) = driver;
    let (c, d) = completion(driver);
    let ks: Vec<i64> = sp.terms.iter().map(|((w1, w2), _)| a * w2 - b * w1).collect();
    let kmin = *ks.iter().min().unwrap();
    let kmax = *ks.iter().max().unwrap();
    if kmin == kmax {
        return Vec::new();
    }
    let mut groups: Vec<Vec<C64>> = vec![Vec::new(); (kmax - kmin + 1) as usize];
    for (((w1, w2), l), k) in sp.terms.iter().zip(&ks) {
        let m = d * w1 - c * w2;
        groups[(k - kmin) as usize].push(l + zeta * m as f64 + ls_center * *k as f64);
    }
    let logs: Vec<Option<C64>> = groups.iter().map(|g| if g.is_empty() { None } else { log_sum(g) }).collect();
    let top = logs.iter().flatten().fold(f64::NEG_INFINITY, |m, l| m.max(l.re));
    let coeffs: Vec<C64> = logs.iter().map(|l| l.map_or(C64::zero(), |l| (l - top).exp())).collect();
    roots::poly_roots(&coeffs)
        .into_iter()
        .filter(|u| u.norm() > 0.0 && u.norm().is_finite())
        .filter_map(|u| {
            let ls = ls_center + u.ln();
            let guess = Pt::new(zeta * d as f64 - ls * b as f64, -(zeta * c as f64) + ls * a as f64);
            correct(sp, driver, zeta, guess)
        })
        .collect()
}

/// Log-distance from `p` to the nearest other point of `C_ε` with the same
/// driver value.
pub fn separation(sp: &SPoly, driver: (i64, i64), p: &Pt) -> f64 {
    let (a, b) = driver;
    let (c, d) = completion(driver);
    let zeta = p.mono(a, b);
    let ls0 = p.mono(c, d);
    let ks: Vec<i64> = sp.terms.iter().map(|((w1, w2), _)| a * w2 - b * w1).collect();
    let kmin = *ks.iter().min().unwrap();
    let kmax = *ks.iter().max().unwrap();
    if kmin == kmax {
        return f64::INFINITY;
    }
    let mut groups: Vec<Vec<C64>> = vec![Vec::new(); (kmax - kmin + 1) as usize];
    for (((w1, w2), l), k) in sp.terms.iter().zip(&ks) {
        let m = d * w1 - c * w2;
        groups[(k - kmin) as usize].push(l + zeta * m as f64 + ls0 * *k as f64);
    }
    let logs: Vec<Option<C64>> = groups.iter().map(|g| if g.is_empty() { None } else { log_sum(g) }).collect();
    let top = logs.iter().flatten().fold(f64::NEG_INFINITY, |m, l| m.max(l.re));
    let coeffs: Vec<C64> = logs.iter().map(|l| l.map_or(C64::zero(), |l| (l - top).exp())).collect();
    let rts = roots::poly_roots(&coeffs);
    let mut ds: Vec<f64> = rts.iter().map(|u| if u.norm() == 0.0 { f64::INFINITY } else { u.ln().norm() }).collect();
    ds.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ds.get(1).copied().unwrap_or(f64::INFINITY)
}

/// Tracks from `start` while the driver follows the polyline `waypoints`
/// (the first waypoint is the driver value at `start`).
pub fn track_polyline(
    sp: &SPoly,
    ctx: &EpsilonContext,
    driver: (i64, i64),
    start: Pt,
    waypoints: &[C64],
) -> Result<TrackedPath, NumError> {
    let (c, d) = completion(driver);
    let z0 = start.mono(driver.0, driver.1);
    // the polyline is given up to the 2πi ambiguity of the start's logarithms
    let tau = 2.0 * std::f64::consts::PI;
    let shift = z0 - waypoints[0];
    let k = (shift.im / tau).round();
    if shift.re.abs() > 1e-6 * (1.0 + z0.norm()) || (shift.im - k * tau).abs() > 1e-6 * (1.0 + z0.norm()) {
        return Err(NumError::Tracking { at: start.trop(ctx.eps), msg: format!("driver mismatch {shift:.3e} at start") });
    }
    let waypoints: Vec<C64> = waypoints.iter().map(|w| w + C64::new(0.0, k * tau)).collect();
    let mut cur = correct(sp, driver, z0, start).ok_or_else(|| NumError::Tracking {
        at: start.trop(ctx.eps),
        msg: "start point is not on the curve".into(),
    })?;
    let mut zeta = z0;
    let mut samples = vec![(zeta, cur)];
    let mut min_sep = separation(sp, driver, &cur);
    let mut h = ctx.step.initial;
    for &target in waypoints.iter().skip(1) {
        loop {
            let rem = target - zeta;
            if rem.norm() < 1e-14 * (1.0 + zeta.norm()) {
                break;
            }
            let dz = if rem.norm() <= h { rem } else { rem * (h / rem.norm()) };
            let (tx, ty) = tangent(sp, driver, &cur);
            let pred = Pt::new(cur.lx + tx * dz, cur.ly + ty * dz);
            let accepted = correct(sp, driver, zeta + dz, pred).and_then(|p| {
                let sep = separation(sp, driver, &p);
                let moved = (p.mono(c, d) - pred.mono(c, d)).norm();
                (moved < sep / 3.0 && moved < 0.25).then_some((p, sep))
            });
            match accepted {
                Some((p, sep)) => {
                    zeta += dz;
                    cur = p;
                    samples.push((zeta, cur));
                    min_sep = min_sep.min(sep);
                    h = (h * 1.5).min(ctx.step.max).min(0.5 * sep.max(1e-6));
                }
                None => {
                    h *= ctx.step.shrink;
                    if h < ctx.step.min {
                        return Err(NumError::Tracking {
                            at: cur.trop(ctx.eps),
                            msg: format!("step underflow near driver value {zeta:.6}"),
                        });
                    }
                }
            }
        }
        if let Some(last) = samples.last_mut() {
            last.0 = target;
        }
        zeta = target;
    }
    Ok(TrackedPath::from_piece(Piece { driver, samples }, ctx.eps, min_sep))
}
