//! ε-evaluation of pL-polynomials in logarithmic coordinates.

use num_traits::Zero;

use crate::plpoly::PLPolynomial;
use crate::puiseux::{q_to_f64, PuiseuxSeries, C64};

/// Complex logarithm of a series at `ε`, computed without forming `ẽ^v`.
pub fn log_eval(s: &PuiseuxSeries, eps: f64) -> Option<C64> {
    let v = s.val()?;
    let mut acc = C64::zero();
    for (e, c) in s.terms() {
        acc += c * (-q_to_f64(*e - v) / eps).exp();
    }
    if acc.is_zero() {
        return None;
    }
    Some(acc.ln() - q_to_f64(v) / eps)
}

/// `ln(e^a − e^b)` for complex logs, stable when the magnitudes differ widely.
pub fn log_sub(a: C64, b: C64) -> C64 {
    if a.re >= b.re {
        a + (C64::new(1.0, 0.0) - (b - a).exp()).ln()
    } else {
        b + ((a - b).exp() - 1.0).ln()
    }
}

/// Point of the curve in logarithmic coordinates `(ln x, ln y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pt {
    pub lx: C64,
    pub ly: C64,
}

fn wrap(d: f64) -> f64 {
    let tau = 2.0 * std::f64::consts::PI;
    d - tau * (d / tau).round()
}

impl Pt {
    pub fn new(lx: C64, ly: C64) -> Self {
        Self { lx, ly }
    }

    pub fn x(&self) -> C64 {
        self.lx.exp()
    }

    pub fn y(&self) -> C64 {
        self.ly.exp()
    }

    /// Tropical shadow `(−ε ln|x|, −ε ln|y|)`.
    pub fn trop(&self, eps: f64) -> (f64, f64) {
        (-eps * self.lx.re, -eps * self.ly.re)
    }

    /// Distance on the torus: arguments compared modulo 2π.
    pub fn dist(&self, o: &Pt) -> f64 {
        let dx = C64::new(self.lx.re - o.lx.re, wrap(self.lx.im - o.lx.im));
        let dy = C64::new(self.ly.re - o.ly.re, wrap(self.ly.im - o.ly.im));
        dx.norm().max(dy.norm())
    }

    /// Monomial `(a, b)` in logarithmic form.
    pub fn mono(&self, a: i64, b: i64) -> C64 {
        self.lx * a as f64 + self.ly * b as f64
    }
}

/// Values of `f` and its logarithmic derivatives at a point, all multiplied
/// by `e^(−scale)`.
#[derive(Clone, Copy, Debug)]
pub struct Eval {
    pub f: C64,
    /// `x f_x`
    pub fx: C64,
    /// `y f_y`
    pub fy: C64,
    pub fxx: C64,
    pub fxy: C64,
    pub fyy: C64,
    pub scale: f64,
    /// Sum of term magnitudes (scaled), the residual reference.
    pub mass: f64,
}

/// `f` at a fixed `ε` with coefficients stored as complex logarithms.
#[derive(Clone, Debug)]
pub struct SPoly {
    pub terms: Vec<((i64, i64), C64)>,
    pub eps: f64,
}

impl SPoly {
    pub fn new(f: &PLPolynomial, eps: f64) -> Self {
        let terms = f
            .coeffs
            .iter()
            .filter_map(|(w, c)| log_eval(c, eps).map(|l| ((w.w1, w.w2), l)))
            .collect();
        Self { terms, eps }
    }

    pub fn eval(&self, p: &Pt) -> Eval {
        let ex: Vec<C64> = self.terms.iter().map(|((a, b), l)| l + p.mono(*a, *b)).collect();
        let scale = ex.iter().fold(f64::NEG_INFINITY, |m, e| m.max(e.re));
        let z = C64::zero();
        let mut out = Eval { f: z, fx: z, fy: z, fxx: z, fxy: z, fyy: z, scale, mass: 0.0 };
        for (((a, b), _), e) in self.terms.iter().zip(&ex) {
            let t = (e - scale).exp();
            let (a, b) = (*a as f64, *b as f64);
            out.f += t;
            out.fx += t * a;
            out.fy += t * b;
            out.fxx += t * a * a;
            out.fxy += t * a * b;
            out.fyy += t * b * b;
            out.mass += t.norm();
        }
        out
    }

    /// `|f| / Σ|terms|` at `p`.
    pub fn rel_residual(&self, p: &Pt) -> f64 {
        let e = self.eval(p);
        e.f.norm() / e.mass
    }

    /// Coefficients of `f` as a polynomial in `y` at fixed `x`, as complex
    /// logs indexed by the y-exponent (`None` for absent powers).
    pub fn y_log_coeffs(&self, lx: C64) -> Vec<Option<C64>> {
        let n = self.terms.iter().map(|((_, b), _)| *b).max().unwrap_or(0).max(0) as usize;
        let mut acc: Vec<Vec<C64>> = vec![Vec::new(); n + 1];
        for ((a, b), l) in &self.terms {
            if *b >= 0 {
                acc[*b as usize].push(l + lx * *a as f64);
            }
        }
        acc.into_iter().map(|v| log_sum(&v)).collect()
    }
}

/// `ln Σ e^(v_k)`, or `None` if the sum vanishes.
pub fn log_sum(v: &[C64]) -> Option<C64> {
    let m = v.iter().fold(f64::NEG_INFINITY, |m, e| m.max(e.re));
    if !m.is_finite() {
        return None;
    }
    let s: C64 = v.iter().map(|e| (e - m).exp()).sum();
    if s.norm() < 1e-300 {
        return None;
    }
    Some(s.ln() + m)
}
