//! Complex bivariate Laurent polynomials: discriminants, torus singular
//! points and root monodromy.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::plpoly::LatticePoint;
use crate::puiseux::C64;
use crate::roots::{self, horner};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Clone, Debug, PartialEq)]
pub struct CPoly {
    pub terms: BTreeMap<LatticePoint, C64>,
}

impl CPoly {
    pub fn new(terms: BTreeMap<LatticePoint, C64>) -> Self {
        let mut p = Self { terms };
        p.terms.retain(|_, c| *c != ZERO);
        p
    }

    pub fn from_pairs(pairs: &[((i64, i64), C64)]) -> Self {
        let mut m = BTreeMap::new();
        for ((a, b), c) in pairs {
            *m.entry(LatticePoint::new(*a, *b)).or_insert(ZERO) += *c;
        }
        Self::new(m)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale_abs(&self) -> f64 {
        self.terms.values().fold(0.0, |a, c| a.max(c.norm()))
    }

    pub fn eval(&self, x: C64, y: C64) -> C64 {
        self.terms.iter().map(|(w, c)| c * x.powi(w.w1 as i32) * y.powi(w.w2 as i32)).sum()
    }

    /// Largest term magnitude at `(x, y)`, the natural residual scale.
    pub fn term_scale(&self, x: C64, y: C64) -> f64 {
        self.terms
            .iter()
            .map(|(w, c)| (c * x.powi(w.w1 as i32) * y.powi(w.w2 as i32)).norm())
            .fold(0.0, f64::max)
    }

    pub fn dx(&self) -> Self {
        Self::new(
            self.terms
                .iter()
                .map(|(w, c)| (LatticePoint::new(w.w1 - 1, w.w2), c * w.w1 as f64))
                .collect(),
        )
    }

    pub fn dy(&self) -> Self {
        Self::new(
            self.terms
                .iter()
                .map(|(w, c)| (LatticePoint::new(w.w1, w.w2 - 1), c * w.w2 as f64))
                .collect(),
        )
    }

    /// Divides by the monomial making all exponents non-negative and minimal.
    pub fn normalized(&self) -> Self {
        let m1 = self.terms.keys().map(|w| w.w1).min().unwrap_or(0);
        let m2 = self.terms.keys().map(|w| w.w2).min().unwrap_or(0);
        Self::new(self.terms.iter().map(|(w, c)| (LatticePoint::new(w.w1 - m1, w.w2 - m2), *c)).collect())
    }

    pub fn x_degree(&self) -> i64 {
        self.terms.keys().map(|w| w.w1).max().unwrap_or(0)
    }

    pub fn y_degree(&self) -> i64 {
        self.terms.keys().map(|w| w.w2).max().unwrap_or(0)
    }

    /// Swaps the roles of x and y.
    pub fn transposed(&self) -> Self {
        Self::new(self.terms.iter().map(|(w, c)| (LatticePoint::new(w.w2, w.w1), *c)).collect())
    }

    /// Coefficients of `y^k` as ascending x-polynomials (requires a
    /// normalized polynomial).
    pub fn y_coeffs(&self) -> Vec<Vec<C64>> {
        let n = self.y_degree() as usize;
        let d = self.x_degree() as usize;
        let mut out = vec![vec![ZERO; d + 1]; n + 1];
        for (w, c) in &self.terms {
            out[w.w2 as usize][w.w1 as usize] += *c;
        }
        out
    }

    /// `f(x, ·)` as ascending coefficients in y.
    pub fn y_poly_at(&self, x: C64) -> Vec<C64> {
        self.y_coeffs().iter().map(|a| horner(a, x).0).collect()
    }

    pub fn y_roots_at(&self, x: C64) -> Vec<C64> {
        roots::poly_roots(&self.y_poly_at(x))
    }
}

/// Sylvester resultant of two ascending coefficient vectors of formal degrees
/// `p.len()-1` and `q.len()-1`.
pub fn resultant(p: &[C64], q: &[C64]) -> C64 {
    let m = p.len() - 1;
    let n = q.len() - 1;
    let size = m + n;
    if size == 0 {
        return C64::new(1.0, 0.0);
    }
    let mut s = DMatrix::<C64>::zeros(size, size);
    for r in 0..n {
        for (k, c) in p.iter().rev().enumerate() {
            s[(r, r + k)] = *c;
        }
    }
    for r in 0..m {
        for (k, c) in q.iter().rev().enumerate() {
            s[(n + r, r + k)] = *c;
        }
    }
    s.determinant()
}

/// Interpolates a polynomial of degree ≤ `deg` from values on a circle of
/// radius `r`; returns ascending coefficients.
pub fn interpolate_on_circle(deg: usize, r: f64, f: impl Fn(C64) -> C64) -> Vec<C64> {
    let m = deg + 1;
    let vals: Vec<C64> = (0..m).map(|j| f(C64::from_polar(r, 2.0 * PI * j as f64 / m as f64))).collect();
    (0..m)
        .map(|k| {
            let s: C64 = (0..m)
                .map(|j| vals[j] * C64::from_polar(1.0, -2.0 * PI * (j * k) as f64 / m as f64))
                .sum();
            s / (m as f64 * r.powi(k as i32))
        })
        .collect()
}

/// Discriminant `Res_y(f, f_y)` as an ascending x-polynomial, with
/// coefficients below `1e-10` of the largest dropped.
pub fn discriminant(f: &CPoly) -> Vec<C64> {
    let f = f.normalized();
    let n = f.y_degree() as usize;
    if n == 0 {
        return vec![C64::new(1.0, 0.0)];
    }
    let a = f.y_coeffs();
    let b: Vec<Vec<C64>> = (0..n).map(|k| a[k + 1].iter().map(|c| c * (k + 1) as f64).collect()).collect();
    let deg = (2 * n - 1) * f.x_degree().max(0) as usize;
    let mut d = interpolate_on_circle(deg, 1.0, |x| {
        let p: Vec<C64> = a.iter().map(|c| horner(c, x).0).collect();
        let q: Vec<C64> = b.iter().map(|c| horner(c, x).0).collect();
        resultant(&p, &q)
    });
    let big = d.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    for c in d.iter_mut() {
        if c.norm() < 1e-10 * big {
            *c = ZERO;
        }
    }
    d
}

/// Nonzero x-values above which sheets collide or escape: roots of the
/// discriminant and of the leading y-coefficient, clustered.
pub fn critical_x(f: &CPoly) -> Vec<C64> {
    let f = f.normalized();
    let mut pts = roots::poly_roots(&discriminant(&f));
    let lead = &f.y_coeffs()[f.y_degree() as usize];
    pts.extend(roots::poly_roots(lead));
    let cl = roots::cluster(&pts, 1e-7);
    cl.into_iter().map(|c| c.0).filter(|z| z.norm() > 1e-12).collect()
}

/// Points of the torus where `f`, `f_x`, `f_y` vanish simultaneously.
pub fn torus_singular_points(f: &CPoly) -> Vec<(C64, C64)> {
    let f = f.normalized();
    if f.y_degree() == 0 {
        let r = roots::cluster(&roots::poly_roots(&f.y_coeffs()[0]), 1e-7);
        return r.iter().filter(|(z, m)| *m > 1 && z.norm() > 1e-12).map(|(z, _)| (*z, C64::new(1.0, 0.0))).collect();
    }
    if discriminant(&f).iter().all(|c| *c == ZERO) {
        // repeated factor: singular along a whole component
        let x = C64::new(0.613, 0.271);
        let y = f.y_roots_at(x)[0];
        return vec![(x, y)];
    }
    let fx = f.dx();
    let fy = f.dy();
    let mut out = Vec::new();
    for xb in roots::poly_roots(&discriminant(&f)) {
        if xb.norm() < 1e-12 {
            continue;
        }
        for y0 in f.y_roots_at(xb) {
            if y0.norm() < 1e-12 || !y0.re.is_finite() {
                continue;
            }
            // refine (x, y) on f = f_y = 0
            let (mut x, mut y) = (xb, y0);
            for _ in 0..30 {
                let (g1, g2) = (f.eval(x, y), fy.eval(x, y));
                let fyy = fy.dy().eval(x, y);
                let fxy = fy.dx().eval(x, y);
                let j11 = fx.eval(x, y);
                let j12 = fy.eval(x, y);
                let det = j11 * fyy - j12 * fxy;
                if det.norm() == 0.0 {
                    break;
                }
                let dx = (g1 * fyy - j12 * g2) / det;
                let dy = (j11 * g2 - fxy * g1) / det;
                x -= dx;
                y -= dy;
                if dx.norm() + dy.norm() < 1e-15 * (x.norm() + y.norm()) {
                    break;
                }
            }
            let s = f.term_scale(x, y).max(1e-300);
            let sx = s / x.norm().max(1e-300);
            let sy = s / y.norm().max(1e-300);
            if f.eval(x, y).norm() < 1e-8 * s && fx.eval(x, y).norm() < 1e-6 * sx && fy.eval(x, y).norm() < 1e-6 * sy
            {
                out.push((x, y));
            }
        }
    }
    out
}

/// Matches `next` to `prev` by nearest neighbour; `None` when the step is too
/// large for an unambiguous assignment.
fn match_roots(prev: &[C64], next: &[C64]) -> Option<Vec<usize>> {
    let n = prev.len();
    let mut sep = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            sep = sep.min((prev[i] - prev[j]).norm());
        }
    }
    let mut used = vec![false; n];
    let mut perm = vec![0; n];
    for i in 0..n {
        let (mut best, mut bd) = (usize::MAX, f64::INFINITY);
        for j in 0..n {
            let d = (prev[i] - next[j]).norm();
            if !used[j] && d < bd {
                best = j;
                bd = d;
            }
        }
        if best == usize::MAX || bd > sep / 3.0 {
            return None;
        }
        used[best] = true;
        perm[i] = best;
    }
    Some(perm)
}

/// Transports the y-roots over `x` along the polyline `pts`. Returns the
/// roots at the end in the order induced by the start order.
pub fn transport_roots(f: &CPoly, pts: &[C64], start: &[C64]) -> Option<Vec<C64>> {
    let mut cur = start.to_vec();
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut t = 0.0f64;
        let mut h = 0.05f64;
        while t < 1.0 {
            let t1 = (t + h).min(1.0);
            let x = a + (b - a) * t1;
            let nxt = f.y_roots_at(x);
            if nxt.len() != cur.len() {
                return None;
            }
            match match_roots(&cur, &nxt) {
                Some(p) => {
                    cur = p.iter().map(|&j| nxt[j]).collect();
                    t = t1;
                    h = (h * 1.5).min(0.05);
                }
                None => {
                    h *= 0.5;
                    if h < 1e-9 {
                        return None;
                    }
                }
            }
        }
    }
    Some(cur)
}

/// Orbits of the monodromy action on the y-sheets over the punctured
/// x-plane (punctures: critical values and the origin).
pub fn monodromy_orbits(f: &CPoly) -> Option<Vec<Vec<usize>>> {
    let f = f.normalized();
    let n = f.y_degree() as usize;
    let mut punct = critical_x(&f);
    punct.push(ZERO);
    let rmax = punct.iter().fold(1.0f64, |m, z| m.max(z.norm()));
    let base = C64::from_polar(2.0 * rmax + 1.0, 2.417);
    let start = f.y_roots_at(base);
    if start.len() != n {
        return None;
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, i: usize) -> usize {
        if p[i] != i {
            let r = find(p, p[i]);
            p[i] = r;
        }
        p[i]
    }
    for (k, &c) in punct.iter().enumerate() {
        let mut rad = f64::INFINITY;
        for (j, &o) in punct.iter().enumerate() {
            if j != k {
                rad = rad.min((o - c).norm());
            }
        }
        let rad = if rad.is_finite() { 0.3 * rad } else { 0.5 };
        let dir = (base - c) / (base - c).norm();
        let entry = c + dir * rad;
        let mut loop_pts = vec![base, entry];
        for s in 1..=32 {
            loop_pts.push(c + dir * C64::from_polar(rad, 2.0 * PI * s as f64 / 32.0));
        }
        loop_pts.push(base);
        let end = transport_roots(&f, &loop_pts, &start)?;
        let perm = match_roots(&start, &end)?;
        for (i, &j) in perm.iter().enumerate() {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            parent[a] = b;
        }
    }
    let mut orbits: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        orbits.entry(r).or_default().push(i);
    }
    Some(orbits.into_values().collect())
}

/// Numerical irreducibility over ℂ[x^±, y^±]: no pure-x content and a
/// transitive monodromy on the y-sheets.
pub fn is_irreducible(f: &CPoly) -> Option<bool> {
    let f = f.normalized();
    if f.is_zero() {
        return Some(false);
    }
    if f.y_degree() == 0 {
        return Some(f.x_degree() == 1);
    }
    let a = f.y_coeffs();
    let lead = &a[f.y_degree() as usize];
    for z in roots::poly_roots(lead) {
        if z.norm() < 1e-12 {
            continue;
        }
        let content = a.iter().all(|c| {
            let s = c.iter().enumerate().map(|(k, v)| v.norm() * z.norm().powi(k as i32)).fold(0.0, f64::max);
            horner(c, z).0.norm() <= 1e-8 * s.max(1e-300)
        });
        if content {
            return Some(false);
        }
    }
    if discriminant(&f).iter().all(|c| *c == ZERO) {
        return Some(false);
    }
    monodromy_orbits(&f).map(|o| o.len() == 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(r: f64) -> C64 {
        C64::new(r, 0.0)
    }

    #[test]
    fn resultant_of_linear_factors() {
        // (y-1)(y-2) and y-2 share a root; with y-3 the resultant is (3-1)(3-2)
        let p = [c(2.0), c(-3.0), c(1.0)];
        assert!(resultant(&p, &[c(-2.0), c(1.0)]).norm() < 1e-12);
        assert!((resultant(&p, &[c(-3.0), c(1.0)]) - c(2.0)).norm() < 1e-12);
    }

    #[test]
    fn discriminant_of_conic() {
        // y² - x: Res(y² - x, 2y) = -4x up to sign convention
        let f = CPoly::from_pairs(&[((0, 2), c(1.0)), ((1, 0), c(-1.0))]);
        let d = discriminant(&f);
        assert!(d[0].norm() < 1e-12);
        assert!((d[1].norm() - 4.0).abs() < 1e-10);
    }

    #[test]
    fn irreducibility_probe() {
        let node = CPoly::from_pairs(&[((1, 2), c(1.0)), ((0, 2), c(1.0)), ((2, 1), c(1.0))]);
        assert_eq!(is_irreducible(&node), Some(true));
        let split = CPoly::from_pairs(&[((1, 1), c(1.0)), ((1, 0), c(1.0)), ((0, 1), c(1.0)), ((0, 0), c(1.0))]);
        assert_eq!(is_irreducible(&split), Some(false));
        let edge = CPoly::from_pairs(&[((2, 0), c(1.0)), ((1, 0), c(3.0)), ((0, 0), c(2.0))]);
        assert_eq!(is_irreducible(&edge), Some(false));
        // y² - x is irreducible; y² - x² is not
        let para = CPoly::from_pairs(&[((0, 2), c(1.0)), ((1, 0), c(-1.0))]);
        assert_eq!(is_irreducible(&para), Some(true));
        let cross = CPoly::from_pairs(&[((0, 2), c(1.0)), ((2, 0), c(-1.0))]);
        assert_eq!(is_irreducible(&cross), Some(false));
    }

    #[test]
    fn singular_points_in_torus() {
        let f = CPoly::from_pairs(&[
            ((0, 2), c(1.0)),
            ((0, 1), c(-2.0)),
            ((0, 0), c(1.0)),
            ((3, 0), c(-1.0)),
            ((2, 0), c(2.0)),
            ((1, 0), c(-1.0)),
        ]);
        // (y-1)² - (x-1)²·x has a node at (1, 1)
        let s = torus_singular_points(&f);
        assert!(s.iter().any(|(x, y)| (x - c(1.0)).norm() < 1e-6 && (y - c(1.0)).norm() < 1e-6));
        let smooth = CPoly::from_pairs(&[((1, 2), c(1.0)), ((0, 2), c(1.0)), ((2, 1), c(1.0))]);
        assert!(torus_singular_points(&smooth).is_empty());
    }
}
