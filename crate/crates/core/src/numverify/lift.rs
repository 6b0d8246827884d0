//! Lifting a root of a truncation `f^P` to a Puiseux-series point of the
//! curve.

use num_traits::Zero;

use super::NumError;
use crate::plpoly::{theta_set, truncation, PLPolynomial, QPoint};
use crate::puiseux::{newton_puiseux_roots, residual_valuation, PuiseuxSeries, UnivariateSeriesPoly, C64, Q};

#[derive(Clone, Debug)]
pub struct LiftResult {
    pub x: PuiseuxSeries,
    pub y: PuiseuxSeries,
    /// The coordinate held at its leading term (`'x'` or `'y'`).
    pub fixed: char,
    /// `val f(x, y)` after resubstitution; `None` when it vanishes exactly.
    pub residual_valuation: Option<Q>,
}

impl LiftResult {
    pub fn meets(&self, order: Q) -> bool {
        self.residual_valuation.map_or(true, |v| v >= order)
    }
}

/// Lifts the root `(x̂₀, ŷ₀)` of `f^P` to `(x, y)` with `val f(x, y) ≥ order`.
pub fn lift_point(f: &PLPolynomial, p: &QPoint, seed: (C64, C64), order: Q) -> Result<LiftResult, NumError> {
    let theta = theta_set(f, p);
    if theta.len() < 2 {
        return Err(NumError::Lift("Θ(P) singleton: the point is not on the tropical curve".into()));
    }
    let tr = truncation(f, p);
    let (x0, y0) = seed;
    if x0.is_zero() || y0.is_zero() {
        return Err(NumError::Lift("seed must lie in the torus".into()));
    }
    let mut val = C64::zero();
    let mut mass = 0.0;
    for (w, c) in &tr.main {
        let t = c * x0.powi(w.w1 as i32) * y0.powi(w.w2 as i32);
        val += t;
        mass += t.norm();
    }
    if val.norm() > 1e-8 * mass {
        return Err(NumError::Lift(format!("seed is not a root of f^P (residual {:.2e})", val.norm() / mass)));
    }
    // on a vertical edge f^P does not involve y beyond a monomial factor
    let w2s: Vec<i64> = theta.iter().map(|w| w.w2).collect();
    let fix_y = w2s.iter().all(|v| *v == w2s[0]);
    let (fixed_val, fixed_unit, free_val, free_unit) = if fix_y { (p.y, y0, p.x, x0) } else { (p.x, x0, p.y, y0) };
    let fixed_series = PuiseuxSeries::monomial(fixed_unit, fixed_val);

    let free_exp = |w1: i64, w2: i64| if fix_y { (w2, w1) } else { (w1, w2) };
    let kmin = f.coeffs.keys().map(|w| free_exp(w.w1, w.w2).1).min().unwrap();
    let kmax = f.coeffs.keys().map(|w| free_exp(w.w1, w.w2).1).max().unwrap();
    let mut coeffs = vec![PuiseuxSeries::zero(); (kmax - kmin + 1) as usize];
    for (w, c) in &f.coeffs {
        let (m, k) = free_exp(w.w1, w.w2);
        let term = c.scale(fixed_unit.powi(m as i32)).shift(fixed_val * Q::from_integer(m));
        let slot = &mut coeffs[(k - kmin) as usize];
        *slot = &*slot + &term;
    }
    let poly = UnivariateSeriesPoly::new(coeffs);
    let roots = newton_puiseux_roots(&poly, order)?;
    let best = roots
        .into_iter()
        .filter(|r| r.val() == Some(free_val))
        .min_by(|a, b| {
            let da = (a.coeff_at(free_val) - free_unit).norm();
            let db = (b.coeff_at(free_val) - free_unit).norm();
            da.partial_cmp(&db).unwrap()
        })
        .ok_or_else(|| NumError::Lift("no root with the expected valuation".into()))?;
    let residual = residual_valuation(&poly, &best);
    let (x, y) = if fix_y { (best, fixed_series) } else { (fixed_series, best) };
    Ok(LiftResult { x, y, fixed: if fix_y { 'y' } else { 'x' }, residual_valuation: residual })
}

/// A root of `f^P` with the fixed coordinate at `e^(i·phase)`; among the
/// nonzero roots in the free coordinate the first by `(re, im)` is taken.
pub fn truncation_root(f: &PLPolynomial, p: &QPoint, phase: f64) -> Result<(C64, C64), NumError> {
    let theta = theta_set(f, p);
    if theta.len() < 2 {
        return Err(NumError::Lift("Θ(P) singleton: the point is not on the tropical curve".into()));
    }
    let tr = truncation(f, p);
    let fix_y = theta.iter().all(|w| w.w2 == theta.iter().next().unwrap().w2);
    let u = C64::from_polar(1.0, phase);
    let split = |w: &crate::plpoly::LatticePoint| if fix_y { (w.w2, w.w1) } else { (w.w1, w.w2) };
    let kmin = tr.main.keys().map(|w| split(w).1).min().unwrap();
    let kmax = tr.main.keys().map(|w| split(w).1).max().unwrap();
    let mut c = vec![C64::zero(); (kmax - kmin + 1) as usize];
    for (w, a) in &tr.main {
        let (m, k) = split(w);
        c[(k - kmin) as usize] += a * u.powi(m as i32);
    }
    let mut r: Vec<C64> = crate::roots::poly_roots(&c).into_iter().filter(|z| z.norm() > 1e-12).collect();
    r.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    let z = *r.first().ok_or_else(|| NumError::Lift("f^P has no root in the torus".into()))?;
    Ok(if fix_y { (z, u) } else { (u, z) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plpoly::parse;
    use crate::puiseux::{q, qi};

    const EX1: &str = "(x+e)*y^2+(x+e^2)*(x+e^3)*y+e^8";

    #[test]
    fn lifts_at_alpha() {
        // f^α = xy² + y² + x²y; take x̂ = 1, then 2y + 1 = 0
        let f = parse(EX1).unwrap();
        let p = QPoint::new(qi(1), qi(1));
        let r = lift_point(&f, &p, (C64::new(1.0, 0.0), C64::new(-0.5, 0.0)), qi(8)).unwrap();
        assert!(r.meets(qi(8)));
        assert_eq!(r.y.val(), Some(qi(1)));
        assert!((r.y.coeff_at(qi(1)) + 0.5).norm() < 1e-12);
    }

    #[test]
    fn order_zero_keeps_leading_terms() {
        let f = parse(EX1).unwrap();
        let p = QPoint::new(qi(1), qi(1));
        let r = lift_point(&f, &p, (C64::new(1.0, 0.0), C64::new(-0.5, 0.0)), qi(0)).unwrap();
        assert!((r.y.coeff_at(qi(1)) + 0.5).norm() < 1e-12);
    }

    #[test]
    fn truncation_roots_lift_at_every_vertex() {
        let f = parse(EX1).unwrap();
        let t = crate::tropcurve::tropicalize(&f).unwrap();
        for v in &t.vertices {
            let seed = truncation_root(&f, &v.pos, 0.3).unwrap();
            let r = lift_point(&f, &v.pos, seed, qi(8)).unwrap();
            assert!(r.meets(qi(8)), "{:?}", v.pos);
        }
    }

    #[test]
    fn off_curve_is_rejected() {
        let f = parse(EX1).unwrap();
        let err = lift_point(&f, &QPoint::new(qi(0), q(-7, 1)), (C64::new(1.0, 0.0), C64::new(1.0, 0.0)), qi(2)).unwrap_err();
        assert!(err.to_string().contains("Θ(P) singleton"));
    }
}
