//! Truncated convergent Puiseux series in the small quantity `ẽ = e^(-1/ε)`.
//!
//! A [`PuiseuxSeries`] stores finitely many terms `c·ẽ^q` with exact rational
//! exponents and double-precision complex coefficients, together with a
//! truncation order: the series is known exactly up to `O(ẽ^trunc)`.
//! Arithmetic propagates the tightest order that can be certified from the
//! operands.
//!
//! [`newton_puiseux_roots`] expands the roots of a univariate polynomial with
//! series coefficients by Newton-polygon iteration.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::roots;

/// Exact rational exponent.
pub type Q = Rational64;
pub type C64 = Complex64;

/// Default relative tolerance for equality of complex leading units.
pub const UNIT_TOL: f64 = 1e-9;
/// Default Newton–Puiseux round budget per branch.
pub const ROUND_BUDGET: usize = 64;
/// Terms below this fraction of the largest coefficient magnitude are
/// treated as cancellation noise inside Newton–Puiseux.
const CHOP_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PuiseuxError {
    #[error("zero series has no leading coefficient")]
    ZeroSeries,
    #[error("valuation {0} is not zero")]
    NotAUnit(Q),
    #[error("polynomial must have degree at least one")]
    DegreeZero,
    #[error("Newton-Puiseux branch stalled at slope {slope} after {rounds} rounds")]
    Stalled { slope: Q, rounds: usize },
    #[error("Newton polygon inconsistent at slope {0}: initial form has too few roots")]
    Inconsistent(Q),
}

pub fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(n)
}

pub fn q_to_f64(x: Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Formats a rational as `p/q` (or `p` when integral).
pub fn fmt_q(x: Q) -> String {
    if x.is_integer() {
        format!("{}", x.numer())
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `p/q` or `p` into a rational.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let n: i64 = a.trim().parse().ok()?;
        let d: i64 = b.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        Some(Q::new(n, d))
    } else {
        s.parse::<i64>().ok().map(Q::from_integer)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PuiseuxSeries {
    terms: BTreeMap<Q, C64>,
    /// `None` means exact (truncation order `+∞`).
    trunc: Option<Q>,
}

impl PuiseuxSeries {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new(), trunc: None }
    }

    pub fn one() -> Self {
        Self::constant(C64::new(1.0, 0.0))
    }

    pub fn constant(c: C64) -> Self {
        Self::monomial(c, Q::zero())
    }

    pub fn monomial(c: C64, exp: Q) -> Self {
        let mut terms = BTreeMap::new();
        if c != C64::new(0.0, 0.0) {
            terms.insert(exp, c);
        }
        Self { terms, trunc: None }
    }

    /// Builds a series from `(exponent, coefficient)` pairs, summing repeats.
    pub fn from_terms<I: IntoIterator<Item = (Q, C64)>>(it: I, trunc: Option<Q>) -> Self {
        let mut terms: BTreeMap<Q, C64> = BTreeMap::new();
        for (e, c) in it {
            *terms.entry(e).or_insert(C64::new(0.0, 0.0)) += c;
        }
        let mut s = Self { terms, trunc };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        let t = self.trunc;
        self.terms.retain(|e, c| *c != C64::new(0.0, 0.0) && t.map_or(true, |t| *e < t));
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Q, &C64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn trunc_order(&self) -> Option<Q> {
        self.trunc
    }

    pub fn with_trunc(mut self, t: Option<Q>) -> Self {
        self.trunc = match (self.trunc, t) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, None) => a,
            (None, b) => b,
        };
        self.normalize();
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Minimum stored exponent; `None` encodes `+∞` for the zero series.
    pub fn val(&self) -> Option<Q> {
        self.terms.keys().next().copied()
    }

    /// Coefficient at the valuation (relaxed variant).
    pub fn leading_coeff(&self) -> Result<C64, PuiseuxError> {
        self.terms.values().next().copied().ok_or(PuiseuxError::ZeroSeries)
    }

    /// The complex limit of a unit of the valuation ring.
    pub fn leading_unit(&self) -> Result<C64, PuiseuxError> {
        match self.val() {
            None => Err(PuiseuxError::ZeroSeries),
            Some(v) if !v.is_zero() => Err(PuiseuxError::NotAUnit(v)),
            Some(_) => self.leading_coeff(),
        }
    }

    pub fn coeff_at(&self, e: Q) -> C64 {
        self.terms.get(&e).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    /// Multiplies by `ẽ^s`.
    pub fn shift(&self, s: Q) -> Self {
        Self {
            terms: self.terms.iter().map(|(e, c)| (*e + s, *c)).collect(),
            trunc: self.trunc.map(|t| t + s),
        }
    }

    pub fn scale(&self, k: C64) -> Self {
        let mut r = Self {
            terms: self.terms.iter().map(|(e, c)| (*e, *c * k)).collect(),
            trunc: self.trunc,
        };
        r.normalize();
        r
    }

    /// Common denominator of the stored exponents (ramification index).
    pub fn ramification(&self) -> i64 {
        self.terms.keys().fold(1i64, |acc, e| acc.lcm(e.denom()))
    }

    /// Value at a concrete `ε`, summing the smallest contributions first.
    pub fn eval_at(&self, eps: f64) -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for (e, c) in self.terms.iter().rev() {
            s += c * (-q_to_f64(*e) / eps).exp();
        }
        s
    }

    /// Drops terms whose magnitude is below `tol` times the largest one.
    pub fn chop(&self, tol: f64) -> Self {
        let m = self.terms.values().fold(0.0f64, |a, c| a.max(c.norm()));
        let mut r = self.clone();
        r.terms.retain(|_, c| c.norm() > tol * m);
        r
    }

    pub fn chop_abs(&self, thr: f64) -> Self {
        let mut r = self.clone();
        r.terms.retain(|_, c| c.norm() > thr);
        r
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0f64, |a, c| a.max(c.norm()))
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut r = Self::one();
        for _ in 0..n {
            r = &r * self;
        }
        r
    }
}

fn min_opt(a: Option<Q>, b: Option<Q>) -> Option<Q> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (None, None) => None,
    }
}

fn add_opt(a: Option<Q>, b: Option<Q>) -> Option<Q> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x + y),
        _ => None,
    }
}

impl Add for &PuiseuxSeries {
    type Output = PuiseuxSeries;
    fn add(self, o: &PuiseuxSeries) -> PuiseuxSeries {
        let mut terms = self.terms.clone();
        for (e, c) in &o.terms {
            *terms.entry(*e).or_insert(C64::new(0.0, 0.0)) += c;
        }
        let mut r = PuiseuxSeries { terms, trunc: min_opt(self.trunc, o.trunc) };
        r.normalize();
        r
    }
}

impl Neg for &PuiseuxSeries {
    type Output = PuiseuxSeries;
    fn neg(self) -> PuiseuxSeries {
        PuiseuxSeries { terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect(), trunc: self.trunc }
    }
}

impl Sub for &PuiseuxSeries {
    type Output = PuiseuxSeries;
    fn sub(self, o: &PuiseuxSeries) -> PuiseuxSeries {
        self + &(-o)
    }
}

impl Mul for &PuiseuxSeries {
    type Output = PuiseuxSeries;
    fn mul(self, o: &PuiseuxSeries) -> PuiseuxSeries {
        // an operand that is zero up to O(ẽ^t) contributes valuation ≥ t
        let eff = |s: &PuiseuxSeries| s.val().or(s.trunc);
        let trunc = min_opt(add_opt(self.trunc, eff(o)), add_opt(o.trunc, eff(self)));
        let mut terms: BTreeMap<Q, C64> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e = *e1 + *e2;
                if trunc.map_or(true, |t| e < t) {
                    *terms.entry(e).or_insert(C64::new(0.0, 0.0)) += c1 * c2;
                }
            }
        }
        let mut r = PuiseuxSeries { terms, trunc };
        r.normalize();
        r
    }
}

macro_rules! owned_ops {
    ($tr:ident, $m:ident) => {
        impl $tr for PuiseuxSeries {
            type Output = PuiseuxSeries;
            fn $m(self, o: PuiseuxSeries) -> PuiseuxSeries {
                (&self).$m(&o)
            }
        }
    };
}
owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);

impl Neg for PuiseuxSeries {
    type Output = PuiseuxSeries;
    fn neg(self) -> PuiseuxSeries {
        -&self
    }
}

pub fn add(a: &PuiseuxSeries, b: &PuiseuxSeries) -> PuiseuxSeries {
    a + b
}

pub fn mul(a: &PuiseuxSeries, b: &PuiseuxSeries) -> PuiseuxSeries {
    a * b
}

pub fn neg(a: &PuiseuxSeries) -> PuiseuxSeries {
    -a
}

pub fn val(s: &PuiseuxSeries) -> Option<Q> {
    s.val()
}

pub fn leading_unit(s: &PuiseuxSeries) -> Result<C64, PuiseuxError> {
    s.leading_unit()
}

pub fn leading_coeff(s: &PuiseuxSeries) -> Result<C64, PuiseuxError> {
    s.leading_coeff()
}

pub fn eval_at(s: &PuiseuxSeries, eps: f64) -> C64 {
    s.eval_at(eps)
}

fn fmt_c(c: C64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.re == 0.0 {
        format!("{}i", c.im)
    } else {
        format!("({}{:+}i)", c.re, c.im)
    }
}

impl fmt::Display for PuiseuxSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            write!(f, "0")?;
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if e.is_zero() {
                write!(f, "{}", fmt_c(*c))?;
            } else {
                write!(f, "{}*e^{}", fmt_c(*c), fmt_q(*e))?;
            }
        }
        if let Some(t) = self.trunc {
            write!(f, " + O(e^{})", fmt_q(t))?;
        }
        Ok(())
    }
}

/// Polynomial in one variable with series coefficients, ascending degree.
#[derive(Clone, Debug, PartialEq)]
pub struct UnivariateSeriesPoly {
    pub coeffs: Vec<PuiseuxSeries>,
}

impl UnivariateSeriesPoly {
    pub fn new(mut coeffs: Vec<PuiseuxSeries>) -> Self {
        while coeffs.len() > 1 && coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(PuiseuxSeries::zero());
        }
        Self { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn leading(&self) -> &PuiseuxSeries {
        self.coeffs.last().unwrap()
    }

    pub fn eval(&self, y: &PuiseuxSeries) -> PuiseuxSeries {
        let mut acc = PuiseuxSeries::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * y) + c;
        }
        acc
    }

    /// Complex coefficients at a concrete `ε`.
    pub fn eval_coeffs(&self, eps: f64) -> Vec<C64> {
        self.coeffs.iter().map(|c| c.eval_at(eps)).collect()
    }

    /// `p(s + z)` as a polynomial in `z`.
    pub fn taylor_shift(&self, s: &PuiseuxSeries) -> Self {
        let n = self.coeffs.len();
        let mut out: Vec<PuiseuxSeries> = vec![PuiseuxSeries::zero(); n];
        for c in self.coeffs.iter().rev() {
            // out <- out * (s + z) + c
            let mut next = vec![PuiseuxSeries::zero(); n];
            for k in 0..n {
                if out[k].is_zero() && out[k].trunc_order().is_none() {
                    continue;
                }
                next[k] = &next[k] + &(&out[k] * s);
                if k + 1 < n {
                    next[k + 1] = &next[k + 1] + &out[k];
                }
            }
            next[0] = &next[0] + c;
            out = next;
        }
        Self::new(out)
    }

    fn magnitudes(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(abs_terms).collect() }
    }

    /// Taylor shift with cancellation residue removed: a term survives only
    /// if it exceeds `tol` times the summed magnitude of its contributions.
    fn shift_chopped(&self, s: &PuiseuxSeries, tol: f64) -> Self {
        let shifted = self.taylor_shift(s);
        let bound = self.magnitudes().taylor_shift(&abs_terms(s));
        let coeffs = shifted
            .coeffs
            .iter()
            .zip(&bound.coeffs)
            .map(|(c, b)| {
                let mut r = c.clone();
                r.terms.retain(|e, v| v.norm() > tol * b.coeff_at(*e).re);
                r
            })
            .collect();
        Self::new(coeffs)
    }
}

fn abs_terms(c: &PuiseuxSeries) -> PuiseuxSeries {
    PuiseuxSeries::from_terms(c.terms().map(|(e, v)| (*e, C64::new(v.norm(), 0.0))), c.trunc_order())
}

/// Newton–Puiseux configuration.
#[derive(Clone, Copy, Debug)]
pub struct NewtonPuiseuxConfig {
    pub budget: usize,
    pub tol: f64,
}

impl Default for NewtonPuiseuxConfig {
    fn default() -> Self {
        Self { budget: ROUND_BUDGET, tol: UNIT_TOL }
    }
}

/// Roots of `p` as Puiseux series with `val(p(r)) ≥ order`.
pub fn newton_puiseux_roots(p: &UnivariateSeriesPoly, order: Q) -> Result<Vec<PuiseuxSeries>, PuiseuxError> {
    newton_puiseux_roots_with(p, order, NewtonPuiseuxConfig::default())
}

pub fn newton_puiseux_roots_with(
    p: &UnivariateSeriesPoly,
    order: Q,
    cfg: NewtonPuiseuxConfig,
) -> Result<Vec<PuiseuxSeries>, PuiseuxError> {
    let p = UnivariateSeriesPoly::new(p.coeffs.clone());
    if p.degree() == 0 {
        return Err(PuiseuxError::DegreeZero);
    }
    let mut out = Vec::new();
    let k0 = p.coeffs.iter().position(|c| !c.is_zero()).unwrap_or(0);
    for _ in 0..k0 {
        out.push(PuiseuxSeries::zero());
    }
    let rest = UnivariateSeriesPoly::new(p.coeffs[k0..].to_vec());
    if rest.degree() > 0 {
        let n = rest.degree();
        branch(&rest, &PuiseuxSeries::zero(), None, n, order, 0, cfg, &mut out)?;
    }
    Ok(out)
}

/// Lower-hull segments of `{(k, val c_k)}` as `(k1, k2, root valuation)`.
fn newton_segments(p: &UnivariateSeriesPoly) -> Vec<(usize, usize, Q)> {
    let pts: Vec<(usize, Q)> =
        p.coeffs.iter().enumerate().filter_map(|(k, c)| c.val().map(|v| (k, v))).collect();
    let mut hull: Vec<(usize, Q)> = Vec::new();
    for &pt in &pts {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // remove b if it lies on or above segment a-pt
            let lhs = (b.1 - a.1) * Q::from_integer((pt.0 - a.0) as i64);
            let rhs = (pt.1 - a.1) * Q::from_integer((b.0 - a.0) as i64);
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    hull.windows(2)
        .map(|w| {
            let (k1, v1) = w[0];
            let (k2, v2) = w[1];
            (k1, k2, (v1 - v2) / Q::from_integer((k2 - k1) as i64))
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn branch(
    p: &UnivariateSeriesPoly,
    prefix: &PuiseuxSeries,
    min_val: Option<Q>,
    count: usize,
    order: Q,
    depth: usize,
    cfg: NewtonPuiseuxConfig,
    out: &mut Vec<PuiseuxSeries>,
) -> Result<(), PuiseuxError> {
    let c0 = &p.coeffs[0];
    let done = match c0.val() {
        None => c0.trunc_order().map_or(false, |t| t >= order),
        Some(v) => v >= order,
    };
    if depth > 0 && done {
        for _ in 0..count {
            out.push(prefix.clone());
        }
        return Ok(());
    }
    let slope_hint = min_val.unwrap_or(Q::zero());
    if depth >= cfg.budget {
        return Err(PuiseuxError::Stalled { slope: slope_hint, rounds: depth });
    }
    if c0.is_zero() {
        // z = 0 is an exact root of the remaining factor
        let k0 = p.coeffs.iter().position(|c| !c.is_zero()).unwrap_or(p.coeffs.len());
        let z0 = k0.min(count);
        for _ in 0..z0 {
            out.push(prefix.clone());
        }
        if count > z0 {
            let rest = UnivariateSeriesPoly::new(p.coeffs[k0..].to_vec());
            return branch(&rest, prefix, min_val, count - z0, order, depth + 1, cfg, out);
        }
        return Ok(());
    }
    let segs: Vec<(usize, usize, Q)> = newton_segments(p)
        .into_iter()
        .filter(|s| min_val.map_or(true, |m| s.2 > m))
        .collect();
    let width: usize = segs.iter().map(|s| s.1 - s.0).sum();
    if width != count {
        return Err(PuiseuxError::Inconsistent(slope_hint));
    }
    for (k1, k2, gamma) in segs {
        let base = p.coeffs[k1].val().unwrap() + gamma * Q::from_integer(k1 as i64);
        let mut h = vec![C64::new(0.0, 0.0); k2 - k1 + 1];
        for k in k1..=k2 {
            if let Some(v) = p.coeffs[k].val() {
                if v + gamma * Q::from_integer(k as i64) == base {
                    h[k - k1] = p.coeffs[k].leading_coeff()?;
                }
            }
        }
        let rts = roots::poly_roots(&h);
        let cl = roots::cluster(&rts, cfg.tol.max(1e-7));
        let total: usize = cl.iter().map(|c| c.1).sum();
        if total != k2 - k1 {
            return Err(PuiseuxError::Inconsistent(gamma));
        }
        for (rho, mu) in cl {
            let rho = if mu > 1 { roots::polish_multiple(&h, rho, mu) } else { rho };
            let term = PuiseuxSeries::monomial(rho, gamma);
            let next_prefix = prefix + &term;
            let shifted = p.shift_chopped(&term, CHOP_TOL);
            branch(&shifted, &next_prefix, Some(gamma), mu, order, depth + 1, cfg, out)?;
        }
    }
    Ok(())
}

/// `val(p(r))` for a candidate root.
pub fn residual_valuation(p: &UnivariateSeriesPoly, r: &PuiseuxSeries) -> Option<Q> {
    let v = p.eval(r);
    let m = p.coeffs.iter().fold(0.0f64, |a, c| a.max(c.max_abs_coeff()));
    v.chop_abs(1e-9 * m.max(1.0)).val()
}
