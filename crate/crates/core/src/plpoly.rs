//! Parameterised Laurent polynomials `f_ε(x, y) = Σ a_w(ε) x^w1 y^w2` with
//! Puiseux-series coefficients.
//!
//! Covers parsing, the tropical polynomial `Val(X; f)`, Θ-sets, the
//! `Q_w` rescaling, truncations `f^P`, the y-polynomial form
//! `f = Σ a_i(x) y^(N-i)`, per-coefficient root data and the genericness check.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::puiseux::{
    self, fmt_q, newton_puiseux_roots, PuiseuxError, PuiseuxSeries, UnivariateSeriesPoly, C64, Q, UNIT_TOL,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlError {
    #[error("syntax error at column {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("negative exponent in {var}: multiply by a monomial {var}^{k} first")]
    NegativeExponent { var: char, k: i64 },
    #[error("matrix determinant is {0}, expected 1")]
    Determinant(i64),
    #[error(transparent)]
    Puiseux(#[from] PuiseuxError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LatticePoint {
    pub w1: i64,
    pub w2: i64,
}

impl LatticePoint {
    pub fn new(w1: i64, w2: i64) -> Self {
        Self { w1, w2 }
    }

    pub fn dot(&self, p: &QPoint) -> Q {
        p.x * Q::from_integer(self.w1) + p.y * Q::from_integer(self.w2)
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.w1, self.w2)
    }
}

/// Rational point of the tropical plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QPoint {
    pub x: Q,
    pub y: Q,
}

impl QPoint {
    pub fn new(x: Q, y: Q) -> Self {
        Self { x, y }
    }

    pub fn origin() -> Self {
        Self { x: Q::zero(), y: Q::zero() }
    }

    pub fn ints(x: i64, y: i64) -> Self {
        Self { x: Q::from_integer(x), y: Q::from_integer(y) }
    }
}

impl fmt::Display for QPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", fmt_q(self.x), fmt_q(self.y))
    }
}

/// Integer 2×2 matrix, row-major.
pub type Mat2 = [[i64; 2]; 2];

pub fn det2(m: &Mat2) -> i64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut r = [[0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

/// Inverse of a unimodular matrix.
pub fn mat_inv(m: &Mat2) -> Mat2 {
    let d = det2(m);
    [[m[1][1] * d, -m[0][1] * d], [-m[1][0] * d, m[0][0] * d]]
}

#[derive(Clone, Debug, PartialEq)]
pub struct PLPolynomial {
    pub coeffs: BTreeMap<LatticePoint, PuiseuxSeries>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TruncationResult {
    pub main: BTreeMap<LatticePoint, C64>,
    pub theta: BTreeSet<LatticePoint>,
    pub valuation_at_p: Q,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientRootData {
    /// Complex leading unit `c_i`.
    pub c: C64,
    /// `A_i`, valuation of the leading coefficient.
    pub a: Q,
    /// Multiplicity of the root `x = 0`.
    pub m: usize,
    /// `(B_ij, ħ(u_ij))` for the nonzero roots, sorted by valuation then unit.
    pub roots: Vec<(Q, C64)>,
    /// The root series themselves, in the same order.
    pub series: Vec<PuiseuxSeries>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenericnessViolation {
    /// Index `i` of `a_i` (or `None` for a cross-coefficient clash in the
    /// literal reading).
    pub index: Option<usize>,
    pub level: Q,
    pub units: (C64, C64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenericnessReport {
    pub pass: bool,
    pub per_level_pass: bool,
    pub literal_pass: bool,
    pub violations: Vec<GenericnessViolation>,
}

impl PLPolynomial {
    pub fn new(coeffs: BTreeMap<LatticePoint, PuiseuxSeries>) -> Self {
        let mut p = Self { coeffs };
        p.coeffs.retain(|_, c| !c.is_zero());
        p
    }

    pub fn zero() -> Self {
        Self { coeffs: BTreeMap::new() }
    }

    pub fn monomial(w: LatticePoint, c: PuiseuxSeries) -> Self {
        let mut m = BTreeMap::new();
        m.insert(w, c);
        Self::new(m)
    }

    pub fn constant(c: PuiseuxSeries) -> Self {
        Self::monomial(LatticePoint::new(0, 0), c)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn support(&self) -> Vec<LatticePoint> {
        self.coeffs.keys().copied().collect()
    }

    pub fn coeff(&self, w: LatticePoint) -> Option<&PuiseuxSeries> {
        self.coeffs.get(&w)
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut m = self.coeffs.clone();
        for (w, c) in &o.coeffs {
            let e = m.entry(*w).or_insert_with(PuiseuxSeries::zero);
            *e = &*e + c;
        }
        Self::new(m)
    }

    pub fn neg(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(|(w, c)| (*w, -c)).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut m: BTreeMap<LatticePoint, PuiseuxSeries> = BTreeMap::new();
        for (w, c) in &self.coeffs {
            for (v, d) in &o.coeffs {
                let k = LatticePoint::new(w.w1 + v.w1, w.w2 + v.w2);
                let e = m.entry(k).or_insert_with(PuiseuxSeries::zero);
                *e = &*e + &(c * d);
            }
        }
        Self::new(m)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut r = Self::constant(PuiseuxSeries::one());
        for _ in 0..n {
            r = r.mul(self);
        }
        r
    }

    /// Multiplies by the monomial `x^a y^b`.
    pub fn shift(&self, a: i64, b: i64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|(w, c)| (LatticePoint::new(w.w1 + a, w.w2 + b), c.clone())).collect() }
    }

    pub fn scale(&self, s: &PuiseuxSeries) -> Self {
        Self::new(self.coeffs.iter().map(|(w, c)| (*w, c * s)).collect())
    }

    /// Multiplies by the monomial so that the minimal exponents become zero.
    pub fn normalized_exponents(&self) -> (Self, (i64, i64)) {
        let m1 = self.coeffs.keys().map(|w| w.w1).min().unwrap_or(0);
        let m2 = self.coeffs.keys().map(|w| w.w2).min().unwrap_or(0);
        (self.shift(-m1, -m2), (-m1, -m2))
    }

    /// Partial derivative in x (exponent-weighted, ordinary derivative).
    pub fn dx(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .filter(|(w, _)| w.w1 != 0)
                .map(|(w, c)| (LatticePoint::new(w.w1 - 1, w.w2), c.scale(C64::new(w.w1 as f64, 0.0))))
                .collect(),
        )
    }

    pub fn dy(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .filter(|(w, _)| w.w2 != 0)
                .map(|(w, c)| (LatticePoint::new(w.w1, w.w2 - 1), c.scale(C64::new(w.w2 as f64, 0.0))))
                .collect(),
        )
    }
}

impl fmt::Display for PLPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (w, c) in self.coeffs.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})", c)?;
            if w.w1 != 0 {
                write!(f, "*x^{}", w.w1)?;
            }
            if w.w2 != 0 {
                write!(f, "*y^{}", w.w2)?;
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------- parser

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, PlError> {
        Err(PlError::Syntax { pos: self.pos + 1, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && (self.s[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn poly(&mut self) -> Result<PLPolynomial, PlError> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                self.term()?.neg()
            }
            Some(b'+') => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<PLPolynomial, PlError> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn integer(&mut self) -> Result<i64, PlError> {
        self.skip_ws();
        let start = self.pos;
        if self.pos < self.s.len() && (self.s[self.pos] == b'-' || self.s[self.pos] == b'+') {
            self.pos += 1;
        }
        let ds = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if ds == self.pos {
            self.pos = start;
            return self.err("expected integer exponent");
        }
        let txt = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        txt.parse::<i64>().or_else(|_| {
            self.pos = start;
            self.err("integer out of range")
        })
    }

    fn factor(&mut self) -> Result<PLPolynomial, PlError> {
        let c = match self.peek() {
            Some(c) => c,
            None => return self.err("unexpected end of input"),
        };
        match c {
            b'x' | b'y' => {
                self.pos += 1;
                let mut k = 1;
                if self.peek() == Some(b'^') {
                    self.pos += 1;
                    k = self.integer()?;
                }
                let w = if c == b'x' { LatticePoint::new(k, 0) } else { LatticePoint::new(0, k) };
                Ok(PLPolynomial::monomial(w, PuiseuxSeries::one()))
            }
            b'e' => {
                self.pos += 1;
                let mut q = Q::from_integer(1);
                if self.peek() == Some(b'^') {
                    self.pos += 1;
                    let n = self.integer()?;
                    let mut d = 1;
                    if self.peek() == Some(b'/') {
                        self.pos += 1;
                        d = self.integer()?;
                        if d <= 0 {
                            return self.err("exponent denominator must be positive");
                        }
                    }
                    q = Q::new(n, d);
                }
                Ok(PLPolynomial::constant(PuiseuxSeries::monomial(C64::new(1.0, 0.0), q)))
            }
            b'(' => {
                self.pos += 1;
                let inner = self.poly()?;
                if self.peek() != Some(b')') {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                if self.peek() == Some(b'^') {
                    self.pos += 1;
                    let at = self.pos;
                    let k = self.integer()?;
                    if k < 0 {
                        self.pos = at;
                        return self.err("negative exponent on a parenthesized expression");
                    }
                    return Ok(inner.pow(k as u32));
                }
                Ok(inner)
            }
            b'i' => {
                self.pos += 1;
                Ok(PLPolynomial::constant(PuiseuxSeries::constant(C64::new(0.0, 1.0))))
            }
            c if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self.pos < self.s.len() && (self.s[self.pos].is_ascii_digit() || self.s[self.pos] == b'.') {
                    self.pos += 1;
                }
                let txt = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
                let v: f64 = match txt.parse() {
                    Ok(v) => v,
                    Err(_) => {
                        self.pos = start;
                        return self.err(format!("malformed number '{}'", txt));
                    }
                };
                let mut z = C64::new(v, 0.0);
                if self.pos < self.s.len() && self.s[self.pos] == b'i' {
                    self.pos += 1;
                    z = C64::new(0.0, v);
                }
                let mut p = PLPolynomial::constant(PuiseuxSeries::constant(z));
                if self.peek() == Some(b'^') {
                    self.pos += 1;
                    let at = self.pos;
                    let k = self.integer()?;
                    if k < 0 {
                        self.pos = at;
                        return self.err("negative exponent on a number");
                    }
                    p = p.pow(k as u32);
                }
                Ok(p)
            }
            _ => self.err(format!("unexpected character '{}'", c as char)),
        }
    }
}

/// Parses the textual polynomial grammar into an expanded coefficient map.
pub fn parse(text: &str) -> Result<PLPolynomial, PlError> {
    let mut p = Parser { s: text.as_bytes(), pos: 0 };
    let poly = p.poly()?;
    if p.peek().is_some() {
        return p.err("unexpected trailing input");
    }
    if poly.is_zero() {
        return Err(PlError::ZeroPolynomial);
    }
    Ok(poly)
}

// ------------------------------------------------------- tropical data

/// `min_w val(a_w) + w·X`.
pub fn tropical_val(f: &PLPolynomial, p: &QPoint) -> Q {
    f.coeffs
        .iter()
        .filter_map(|(w, c)| c.val().map(|v| v + w.dot(p)))
        .min()
        .expect("non-zero polynomial")
}

pub fn theta_set(f: &PLPolynomial, p: &QPoint) -> BTreeSet<LatticePoint> {
    let m = tropical_val(f, p);
    f.coeffs.iter().filter(|(w, c)| c.val().map(|v| v + w.dot(p)) == Some(m)).map(|(w, _)| *w).collect()
}

/// Coefficient at `v` becomes `a_v · ẽ^(v·w)`.
pub fn q_transform(f: &PLPolynomial, w: &QPoint) -> PLPolynomial {
    PLPolynomial::new(f.coeffs.iter().map(|(v, c)| (*v, c.shift(v.dot(w)))).collect())
}

pub fn truncation(f: &PLPolynomial, p: &QPoint) -> TruncationResult {
    let val = tropical_val(f, p);
    let theta = theta_set(f, p);
    let main = theta.iter().map(|w| (*w, f.coeffs[w].leading_coeff().expect("non-zero coefficient"))).collect();
    TruncationResult { main, theta, valuation_at_p: val }
}

/// `ẽ^(-Val) f∘Q_P − f^P` as a polynomial (the tail of the canonical expression).
pub fn delta_poly(f: &PLPolynomial, p: &QPoint) -> PLPolynomial {
    let val = tropical_val(f, p);
    let mut m = BTreeMap::new();
    for (w, c) in &f.coeffs {
        let s = c.shift(w.dot(p) - val);
        let tail = PuiseuxSeries::from_terms(
            s.terms().filter(|(e, _)| !e.is_zero()).map(|(e, c)| (*e, *c)),
            s.trunc_order(),
        );
        m.insert(*w, tail);
    }
    PLPolynomial::new(m)
}

pub fn delta_norm(f: &PLPolynomial, p: &QPoint, eps: f64) -> f64 {
    delta_poly(f, p).coeffs.values().map(|c| c.eval_at(eps).norm()).fold(0.0, f64::max)
}

/// Splits `f = Σ_{i=0}^N a_i(x) y^(N-i)`, returning `[a_0, …, a_N]`.
pub fn as_y_polynomial(f: &PLPolynomial) -> Result<Vec<UnivariateSeriesPoly>, PlError> {
    if f.is_zero() {
        return Err(PlError::ZeroPolynomial);
    }
    if let Some(w) = f.coeffs.keys().find(|w| w.w2 < 0) {
        return Err(PlError::NegativeExponent { var: 'y', k: -w.w2 });
    }
    if let Some(w) = f.coeffs.keys().find(|w| w.w1 < 0) {
        return Err(PlError::NegativeExponent { var: 'x', k: -w.w1 });
    }
    let n = f.coeffs.keys().map(|w| w.w2).max().unwrap() as usize;
    let dx = f.coeffs.keys().map(|w| w.w1).max().unwrap() as usize;
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let deg_y = (n - i) as i64;
        let mut c = vec![PuiseuxSeries::zero(); dx + 1];
        for (w, s) in &f.coeffs {
            if w.w2 == deg_y {
                c[w.w1 as usize] = s.clone();
            }
        }
        out.push(UnivariateSeriesPoly::new(c));
    }
    Ok(out)
}

pub fn coefficient_root_data(a: &UnivariateSeriesPoly, order: Q) -> Result<CoefficientRootData, PlError> {
    if a.is_zero() {
        return Err(PlError::ZeroPolynomial);
    }
    let lead = a.leading();
    let c = lead.leading_coeff()?;
    let av = lead.val().unwrap();
    let m = a.coeffs.iter().position(|s| !s.is_zero()).unwrap();
    let reduced = UnivariateSeriesPoly::new(a.coeffs[m..].to_vec());
    let mut pairs: Vec<(Q, C64, PuiseuxSeries)> = Vec::new();
    if reduced.degree() > 0 {
        for r in newton_puiseux_roots(&reduced, order)? {
            let v = r.val().expect("nonzero root");
            pairs.push((v, r.leading_coeff()?, r));
        }
    }
    pairs.sort_by(|x, y| x.0.cmp(&y.0).then(crate::roots::cmp_complex(x.1, y.1)));
    Ok(CoefficientRootData {
        c,
        a: av,
        m,
        roots: pairs.iter().map(|p| (p.0, p.1)).collect(),
        series: pairs.into_iter().map(|p| p.2).collect(),
    })
}

fn units_equal(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm())
}

/// Per-level genericness (leading units distinct within each `a_i` and
/// valuation level), with the literal global reading reported alongside.
pub fn genericness_check(f: &PLPolynomial, strict: bool) -> Result<GenericnessReport, PlError> {
    genericness_check_tol(f, strict, UNIT_TOL)
}

pub fn genericness_check_tol(f: &PLPolynomial, strict: bool, tol: f64) -> Result<GenericnessReport, PlError> {
    let coeffs = as_y_polynomial(f)?;
    let mut violations = Vec::new();
    let mut all: Vec<(usize, Q, C64)> = Vec::new();
    for (i, a) in coeffs.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        let data = coefficient_root_data(a, default_root_order(a))?;
        for (j, (b1, u1)) in data.roots.iter().enumerate() {
            for (b2, u2) in data.roots.iter().skip(j + 1) {
                if b1 == b2 && units_equal(*u1, *u2, tol) {
                    violations.push(GenericnessViolation { index: Some(i), level: *b1, units: (*u1, *u2) });
                }
            }
            all.push((i, *b1, *u1));
        }
    }
    let per_level_pass = violations.is_empty();
    let mut literal_pass = per_level_pass;
    let mut literal = Vec::new();
    for (k, (i1, b1, u1)) in all.iter().enumerate() {
        for (i2, _, u2) in all.iter().skip(k + 1) {
            if units_equal(*u1, *u2, tol) && !(i1 == i2 && violations.iter().any(|v| v.index == Some(*i1))) {
                literal_pass = false;
                literal.push(GenericnessViolation { index: None, level: *b1, units: (*u1, *u2) });
            }
        }
    }
    let pass = if strict { literal_pass } else { per_level_pass };
    if strict {
        violations.extend(literal);
    }
    Ok(GenericnessReport { pass, per_level_pass, literal_pass, violations })
}

/// Expansion order that resolves every root to beyond its leading term.
pub fn default_root_order(a: &UnivariateSeriesPoly) -> Q {
    let vals: Vec<Q> = a.coeffs.iter().filter_map(|c| c.val()).collect();
    let lo = vals.iter().min().copied().unwrap_or(Q::zero());
    let hi = vals.iter().max().copied().unwrap_or(Q::zero());
    hi.max(lo) + Q::from_integer(1)
}

/// Re-indexes the support so that `TV(result) = θ·TV(f)`; requires `det θ = 1`.
pub fn affine_transform_poly(f: &PLPolynomial, theta: &Mat2) -> Result<PLPolynomial, PlError> {
    let d = det2(theta);
    if d != 1 {
        return Err(PlError::Determinant(d));
    }
    let [[a, b], [c, dd]] = *theta;
    Ok(PLPolynomial::new(
        f.coeffs
            .iter()
            .map(|(w, s)| (LatticePoint::new(dd * w.w1 - c * w.w2, -b * w.w1 + a * w.w2), s.clone()))
            .collect(),
    ))
}

/// Lattice point image under `θ^{-T}`, the dual action used by
/// [`affine_transform_poly`].
pub fn dual_action(theta: &Mat2, w: LatticePoint) -> LatticePoint {
    let [[a, b], [c, d]] = *theta;
    LatticePoint::new(d * w.w1 - c * w.w2, -b * w.w1 + a * w.w2)
}

pub fn eval_complex(f: &PLPolynomial, eps: f64, x: C64, y: C64) -> C64 {
    let n = f.coeffs.keys().map(|w| w.w2).max().unwrap_or(0);
    let lo = f.coeffs.keys().map(|w| w.w2).min().unwrap_or(0);
    // Horner in y over the rows of equal y-degree
    let mut acc = C64::new(0.0, 0.0);
    for k in (lo..=n).rev() {
        let mut row = C64::new(0.0, 0.0);
        for (w, s) in f.coeffs.iter().filter(|(w, _)| w.w2 == k) {
            row += s.eval_at(eps) * x.powi(w.w1 as i32);
        }
        acc = acc * y + row;
    }
    if lo < 0 {
        acc * y.powi(lo as i32)
    } else {
        acc * y.powi(lo as i32)
    }
}

/// Extended Euclid: `(g, s, t)` with `s·a + t·b = g = gcd(a, b) ≥ 0`.
pub fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, s, t) = ext_gcd(b, Integer::mod_floor(&a, &b));
        (g, t, s - Integer::div_floor(&a, &b) * t)
    }
}

pub fn gcd(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

impl TruncationResult {
    pub fn as_polynomial(&self) -> PLPolynomial {
        PLPolynomial::new(self.main.iter().map(|(w, c)| (*w, PuiseuxSeries::constant(*c))).collect())
    }
}

pub fn format_complex_poly(m: &BTreeMap<LatticePoint, C64>) -> String {
    let mut parts = Vec::new();
    for (w, c) in m.iter().rev() {
        let mut s = if c.im.abs() < 1e-15 { format!("{}", c.re) } else { format!("({}{:+}i)", c.re, c.im) };
        if w.w1 != 0 {
            s.push_str(&if w.w1 == 1 { "*x".to_string() } else { format!("*x^{}", w.w1) });
        }
        if w.w2 != 0 {
            s.push_str(&if w.w2 == 1 { "*y".to_string() } else { format!("*y^{}", w.w2) });
        }
        parts.push(s);
    }
    parts.join(" + ")
}

pub use puiseux::q;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::puiseux::{q, qi};

    pub const EX1: &str = "(x+e)*y^2+(x+e^2)*(x+e^3)*y+e^8";
    pub const EX2: &str = "y^3+(x+e^4)*y^2+e^2*(x+e)*(x+2*e)*y+e^10";

    fn lp(a: i64, b: i64) -> LatticePoint {
        LatticePoint::new(a, b)
    }

    fn mono(c: f64, e: i64) -> PuiseuxSeries {
        PuiseuxSeries::monomial(C64::new(c, 0.0), qi(e))
    }

    #[test]
    fn parse_example_one() {
        let f = parse(EX1).unwrap();
        let sup: Vec<_> = f.support();
        let want = [lp(0, 0), lp(0, 1), lp(0, 2), lp(1, 1), lp(1, 2), lp(2, 1)];
        assert_eq!(sup, want.to_vec());
        assert_eq!(f.coeffs[&lp(1, 2)], PuiseuxSeries::one());
        assert_eq!(f.coeffs[&lp(0, 2)], mono(1.0, 1));
        assert_eq!(f.coeffs[&lp(2, 1)], PuiseuxSeries::one());
        assert_eq!(f.coeffs[&lp(1, 1)], &mono(1.0, 2) + &mono(1.0, 3));
        assert_eq!(f.coeffs[&lp(0, 1)], mono(1.0, 5));
        assert_eq!(f.coeffs[&lp(0, 0)], mono(1.0, 8));
    }

    #[test]
    fn parse_errors() {
        assert_eq!(parse("x*y - x*y"), Err(PlError::ZeroPolynomial));
        match parse("x + * y") {
            Err(PlError::Syntax { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("{:?}", other),
        }
        assert!(matches!(parse("(x+1"), Err(PlError::Syntax { .. })));
        assert!(matches!(parse("(x+1)^-1"), Err(PlError::Syntax { .. })));
    }

    #[test]
    fn parse_example_two_and_literals() {
        let f = parse(EX2).unwrap();
        assert_eq!(f.coeffs.len(), 7);
        assert_eq!(f.coeffs[&lp(0, 3)], PuiseuxSeries::one());
        let g = parse("2*e^3/2 - e^4 + (1+2i)*x^-1").unwrap();
        assert_eq!(
            g.coeffs[&lp(0, 0)],
            PuiseuxSeries::from_terms(vec![(q(3, 2), C64::new(2.0, 0.0)), (qi(4), C64::new(-1.0, 0.0))], None)
        );
        assert_eq!(g.coeffs[&lp(-1, 0)], PuiseuxSeries::constant(C64::new(1.0, 2.0)));
    }

    #[test]
    fn tropical_values() {
        let f = parse(EX1).unwrap();
        assert_eq!(tropical_val(&f, &QPoint::ints(1, 1)), qi(3));
        assert_eq!(tropical_val(&f, &QPoint::ints(10, 10)), qi(8));
        let m = PLPolynomial::monomial(lp(2, 1), mono(1.0, 3));
        let p = QPoint::new(q(1, 3), q(-2, 5));
        assert_eq!(tropical_val(&m, &p), qi(3) + q(2, 3) + q(-2, 5));
    }

    #[test]
    fn theta_examples() {
        let f = parse(EX1).unwrap();
        let t: Vec<_> = theta_set(&f, &QPoint::ints(1, 1)).into_iter().collect();
        assert_eq!(t, vec![lp(0, 2), lp(1, 2), lp(2, 1)]);
        let t0: Vec<_> = theta_set(&f, &QPoint::origin()).into_iter().collect();
        assert_eq!(t0, vec![lp(1, 2), lp(2, 1)]);
        let te: Vec<_> = theta_set(&f, &QPoint::new(qi(2), q(7, 2))).into_iter().collect();
        assert_eq!(te, vec![lp(1, 1), lp(2, 1)]);
    }

    #[test]
    fn q_transform_examples() {
        let f = parse("x+y").unwrap();
        let g = q_transform(&f, &QPoint::ints(1, 2));
        assert_eq!(g.coeffs[&lp(1, 0)], mono(1.0, 1));
        assert_eq!(g.coeffs[&lp(0, 1)], mono(1.0, 2));
        let e1 = parse(EX1).unwrap();
        assert_eq!(q_transform(&e1, &QPoint::origin()), e1);
        assert_eq!(tropical_val(&q_transform(&e1, &QPoint::ints(1, 1)), &QPoint::origin()), qi(3));
    }

    fn complex_map(pairs: &[((i64, i64), f64)]) -> BTreeMap<LatticePoint, C64> {
        pairs.iter().map(|((a, b), c)| (lp(*a, *b), C64::new(*c, 0.0))).collect()
    }

    #[test]
    fn truncation_examples() {
        let f = parse(EX1).unwrap();
        let t = truncation(&f, &QPoint::ints(1, 1));
        assert_eq!(t.main, complex_map(&[((1, 2), 1.0), ((0, 2), 1.0), ((2, 1), 1.0)]));
        let g = parse(EX2).unwrap();
        let tg = truncation(&g, &QPoint::ints(2, 2));
        assert_eq!(tg.main, complex_map(&[((0, 3), 1.0), ((1, 2), 1.0), ((0, 1), 2.0)]));
        let tb = truncation(&g, &QPoint::ints(1, 3));
        // x y² + (x+1)(x+2) y
        assert_eq!(tb.main, complex_map(&[((1, 2), 1.0), ((2, 1), 1.0), ((1, 1), 3.0), ((0, 1), 2.0)]));
    }

    #[test]
    fn delta_norm_examples() {
        let f = parse(EX1).unwrap();
        let a = QPoint::ints(1, 1);
        let eps = 1.0 / 10f64.ln();
        // tail (ẽ+ẽ²)xy + ẽ³y + ẽ⁵ at ẽ = 0.1
        assert!((delta_norm(&f, &a, eps) - 0.11).abs() < 1e-15);
        let ds: Vec<f64> = [0.2, 0.1, 0.05].iter().map(|e| delta_norm(&f, &a, *e)).collect();
        assert!(ds[0] > ds[1] && ds[1] > ds[2]);
        let m = PLPolynomial::monomial(lp(3, 1), mono(2.0, 1));
        assert_eq!(delta_norm(&m, &QPoint::ints(1, 2), 0.1), 0.0);
    }

    #[test]
    fn y_polynomial_examples() {
        let f = parse(EX1).unwrap();
        let a = as_y_polynomial(&f).unwrap();
        assert_eq!(a.len(), 3);
        assert_eq!(a[0].coeffs, vec![mono(1.0, 1), PuiseuxSeries::one()]);
        assert_eq!(a[1].coeffs, vec![mono(1.0, 5), &mono(1.0, 2) + &mono(1.0, 3), PuiseuxSeries::one()]);
        assert_eq!(a[2].coeffs, vec![mono(1.0, 8)]);
        let y = as_y_polynomial(&parse("y").unwrap()).unwrap();
        assert_eq!(y.len(), 2);
        assert!(y[1].is_zero());
        assert!(matches!(as_y_polynomial(&parse("y^-1+x").unwrap()), Err(PlError::NegativeExponent { .. })));
        let g = as_y_polynomial(&parse(EX2).unwrap()).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g[0].coeffs, vec![PuiseuxSeries::one()]);
    }

    #[test]
    fn root_data_examples() {
        let f = parse(EX1).unwrap();
        let a = as_y_polynomial(&f).unwrap();
        let d = coefficient_root_data(&a[1], qi(6)).unwrap();
        assert_eq!(d.m, 0);
        assert_eq!(d.a, qi(0));
        assert_eq!(d.c, C64::new(1.0, 0.0));
        assert_eq!(d.roots.len(), 2);
        assert_eq!(d.roots[0].0, qi(2));
        assert_eq!(d.roots[1].0, qi(3));
        assert!(d.roots.iter().all(|r| (r.1 + C64::new(1.0, 0.0)).norm() < 1e-12));
        let d2 = coefficient_root_data(&a[2], qi(9)).unwrap();
        assert!(d2.roots.is_empty());
        assert_eq!(d2.a, qi(8));
        let g = as_y_polynomial(&parse(EX2).unwrap()).unwrap();
        let d3 = coefficient_root_data(&g[2], qi(4)).unwrap();
        assert_eq!(d3.a, qi(2));
        assert_eq!(d3.roots[0].0, qi(1));
        assert!((d3.roots[0].1 - C64::new(-2.0, 0.0)).norm() < 1e-12);
        assert!((d3.roots[1].1 - C64::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn genericness_examples() {
        let r1 = genericness_check(&parse(EX1).unwrap(), false).unwrap();
        assert!(r1.pass);
        assert!(!r1.literal_pass);
        assert!(!genericness_check(&parse(EX1).unwrap(), true).unwrap().pass);
        assert!(genericness_check(&parse(EX2).unwrap(), false).unwrap().pass);
        let bad = genericness_check(&parse("y^2 + x*y + (x+e)*(x+e)").unwrap(), false).unwrap();
        assert!(!bad.pass);
        assert_eq!(bad.violations[0].level, qi(1));
    }

    #[test]
    fn affine_transform_examples() {
        let f = parse(EX1).unwrap();
        let id = [[1, 0], [0, 1]];
        assert_eq!(affine_transform_poly(&f, &id).unwrap(), f);
        assert!(matches!(affine_transform_poly(&f, &[[2, 0], [0, 1]]), Err(PlError::Determinant(2))));
        // x + ẽ y: TV is the line X = Y + 1; under rotation it becomes θ·line
        let g = parse("x + e*y").unwrap();
        let th = [[0, -1], [1, 0]];
        let h = affine_transform_poly(&g, &th).unwrap();
        for t in -3..4 {
            let p = QPoint::new(qi(t) + qi(1), qi(t));
            let rp = QPoint::new(-p.y, p.x);
            assert_eq!(theta_set(&h, &rp).len(), 2);
        }
    }

    #[test]
    fn eval_examples() {
        let f = parse(EX1).unwrap();
        let eps = 1.0 / 10f64.ln();
        let y = C64::new(0.3, -0.2);
        let x = C64::new(-0.01, 0.0);
        let a0 = C64::new(0.09, 0.0);
        let a1 = x * x + C64::new(0.011, 0.0) * x + C64::new(1e-5, 0.0);
        let want = a0 * y * y + a1 * y + C64::new(1e-8, 0.0);
        assert!((eval_complex(&f, eps, x, y) - want).norm() < 1e-15);
        let g = parse("y - 1").unwrap();
        assert_eq!(eval_complex(&g, 0.1, C64::new(3.0, 0.0), C64::new(1.0, 0.0)), C64::new(0.0, 0.0));
    }

    #[test]
    fn ext_gcd_identity() {
        for (a, b) in [(1, 1), (3, -2), (0, 1), (-1, 0), (2, 5), (-4, 7)] {
            let (g, s, t) = ext_gcd(a, b);
            assert_eq!(s * a + t * b, g);
            assert_eq!(g, gcd(a, b));
        }
        assert_eq!(ext_gcd(1, 1), (1, 0, 1));
    }
}
