//! Meromorphic differentials `P·Ω_f` on `C_ε`, `Ω_f = dx/(x·y·f_y)`, built in
//! a working frame and evaluated in the original coordinates.

use std::f64::consts::PI;

use num_traits::Zero;

use super::eval::{log_sub, Eval, Pt, SPoly};
use super::NumError;
use crate::periods::WorkingFrame;
use crate::plpoly::{Mat2, PLPolynomial};
use crate::puiseux::C64;
use crate::roots;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormKind {
    OmegaF,
    OmegaE,
    OmegaTilde,
    OmegaGamma,
}

/// `coeff · x'^(e1) · y'^(e2) · Π (x' − r_j) · Ω_f` with `(ln x', ln y') = θ·(ln x, ln y)`.
#[derive(Clone, Debug)]
pub struct FormTerm {
    pub coeff: C64,
    pub theta: Mat2,
    pub exps: (i64, i64),
    pub roots: Vec<C64>,
}

impl FormTerm {
    fn log_value(&self, p: &Pt) -> C64 {
        let th = &self.theta;
        let lx = p.lx * th[0][0] as f64 + p.ly * th[0][1] as f64;
        let ly = p.lx * th[1][0] as f64 + p.ly * th[1][1] as f64;
        let mut acc = self.coeff.ln() + lx * self.exps.0 as f64 + ly * self.exps.1 as f64;
        for r in &self.roots {
            acc += log_sub(lx, r.ln());
        }
        acc
    }
}

/// The numerator `φ(x')` of an elementary form, with the coefficient `a_i`
/// whose roots it was built from.
#[derive(Clone, Debug)]
pub struct Numerator {
    /// Ascending coefficients of `φ`.
    pub phi: Vec<C64>,
    /// Ascending coefficients of `a_i(x')` at ε.
    pub a: Vec<C64>,
    /// Index `i` of `a_i` (y'-degree `N − i`).
    pub index: usize,
    /// Roots of `a_i` carrying the poles of `φ/a_i`, with their residue weights.
    pub poles: Vec<(C64, C64)>,
}

impl Numerator {
    /// Largest relative deviation of `φ/a_i` from `Σ w/(x − r)` over `xs`.
    pub fn identity_error(&self, xs: &[C64]) -> f64 {
        xs.iter()
            .map(|&x| {
                let lhs = roots::horner(&self.phi, x).0 / roots::horner(&self.a, x).0;
                let rhs: C64 = self.poles.iter().map(|(r, w)| w / (x - r)).sum();
                (lhs - rhs).norm() / rhs.norm().max(1e-300)
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct DifferentialSpec {
    pub kind: FormKind,
    pub label: String,
    pub terms: Vec<FormTerm>,
    pub numerator: Option<Numerator>,
}

impl DifferentialSpec {
    /// Coefficient of `dζ` at `p` for the driver `ζ = a·ln x + b·ln y`.
    pub fn density_at(&self, e: &Eval, driver: (i64, i64), p: &Pt) -> C64 {
        let den = e.fy * driver.0 as f64 - e.fx * driver.1 as f64;
        let s: C64 = self.terms.iter().map(|t| (t.log_value(p) - e.scale).exp()).sum();
        s / den
    }

    pub fn density(&self, sp: &SPoly, driver: (i64, i64), p: &Pt) -> C64 {
        self.density_at(&sp.eval(p), driver, p)
    }

    /// `Σ c_k·form_k`.
    pub fn combine(parts: &[(C64, &DifferentialSpec)], kind: FormKind, label: String) -> DifferentialSpec {
        let mut terms = Vec::new();
        for (c, s) in parts {
            for t in &s.terms {
                let mut t = t.clone();
                t.coeff *= c;
                if !t.coeff.is_zero() {
                    terms.push(t);
                }
            }
        }
        DifferentialSpec { kind, label, terms, numerator: None }
    }
}

/// `a_i(x')` of the frame polynomial at ε: ascending coefficients, the
/// lowest power `m`, the top coefficient and all nonzero roots.
pub struct CoefficientAtEps {
    pub coeffs: Vec<C64>,
    pub m: i64,
    pub lead: C64,
    pub roots: Vec<C64>,
}

pub fn coefficient_at_eps(poly: &PLPolynomial, ydeg: i64, eps: f64) -> Result<CoefficientAtEps, NumError> {
    let mut pairs: Vec<(i64, C64)> =
        poly.coeffs.iter().filter(|(w, _)| w.w2 == ydeg).map(|(w, c)| (w.w1, c.eval_at(eps))).collect();
    pairs.retain(|(_, c)| !c.is_zero());
    if pairs.is_empty() {
        return Err(NumError::Form(format!("coefficient of y^{ydeg} vanishes")));
    }
    let m = pairs.iter().map(|p| p.0).min().unwrap();
    let top = pairs.iter().map(|p| p.0).max().unwrap();
    let mut coeffs = vec![C64::zero(); (top + 1).max(0) as usize];
    for (k, c) in &pairs {
        coeffs[*k as usize] += c;
    }
    let roots: Vec<C64> = roots::poly_roots(&coeffs[m as usize..]);
    let roots = roots.into_iter().map(|r| polish(&coeffs, r)).collect();
    Ok(CoefficientAtEps { lead: coeffs[top as usize], coeffs, m, roots })
}

fn polish(c: &[C64], mut z: C64) -> C64 {
    for _ in 0..4 {
        let (v, d) = roots::horner(c, z);
        if d.is_zero() {
            break;
        }
        let s = v / d;
        if !(s.re.is_finite() && s.im.is_finite()) || s.norm() > 0.1 * z.norm() {
            break;
        }
        z -= s;
    }
    z
}

/// Index of the root closest to `e^lx` in logarithmic distance.
pub fn nearest_root(roots: &[C64], lx: C64) -> usize {
    let d = |r: &C64| {
        let v = r.ln() - lx;
        let im = v.im - 2.0 * PI * (v.im / (2.0 * PI)).round();
        v.re.hypot(im)
    };
    (0..roots.len()).min_by(|&i, &j| d(&roots[i]).partial_cmp(&d(&roots[j])).unwrap()).unwrap()
}

fn expand(lead: C64, m: i64, roots: &[C64]) -> Vec<C64> {
    let mut p = vec![lead];
    for r in roots {
        let mut q = vec![C64::zero(); p.len() + 1];
        for (k, c) in p.iter().enumerate() {
            q[k + 1] += c;
            q[k] -= c * r;
        }
        p = q;
    }
    let mut out = vec![C64::zero(); m as usize];
    out.extend(p);
    out
}

fn frame_lx(theta: &Mat2, p: &Pt) -> C64 {
    p.lx * theta[0][0] as f64 + p.ly * theta[0][1] as f64
}

fn frame_n(fr: &WorkingFrame) -> i64 {
    fr.poly.coeffs.keys().map(|w| w.w2).max().unwrap_or(0)
}

/// `ω_E` for the vertical edge `e` of the frame; `on_copy` is any point on
/// the cylinder of the chosen copy.
pub fn omega_e_spec(fr: &WorkingFrame, eps: f64, e: usize, on_copy: &Pt) -> Result<DifferentialSpec, NumError> {
    let i = fr.floor_of(e)?;
    let n = frame_n(fr);
    let ca = coefficient_at_eps(&fr.poly, n - i as i64, eps)?;
    let k = nearest_root(&ca.roots, frame_lx(&fr.theta, on_copy));
    let others: Vec<C64> = ca.roots.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, r)| *r).collect();
    let c = -ca.lead / C64::new(0.0, 2.0 * PI);
    let term = FormTerm { coeff: c, theta: fr.theta, exps: (ca.m + 1 - fr.shift.0, n - i as i64 - fr.shift.1), roots: others.clone() };
    let numerator = Numerator {
        phi: expand(c, ca.m, &others),
        a: ca.coeffs.clone(),
        index: i,
        poles: vec![(ca.roots[k], -C64::new(0.0, 2.0 * PI).inv())],
    };
    Ok(DifferentialSpec {
        kind: FormKind::OmegaE,
        label: format!("omega_E[e{e}]"),
        terms: vec![term],
        numerator: Some(numerator),
    })
}

/// `ω_f` for a leaf that is vertical towards `Y = +∞` in the frame; the two
/// points locate the horns `P₊` (residue `+1`) and `P₋` (residue `−1`).
pub fn omega_f_spec(fr: &WorkingFrame, eps: f64, p_plus: &Pt, p_minus: &Pt) -> Result<DifferentialSpec, NumError> {
    let ca = coefficient_at_eps(&fr.poly, 0, eps)?;
    let k1 = nearest_root(&ca.roots, frame_lx(&fr.theta, p_plus));
    let k2 = nearest_root(&ca.roots, frame_lx(&fr.theta, p_minus));
    if k1 == k2 {
        return Err(NumError::Form("horns P+ and P- resolve to the same root".into()));
    }
    let (r1, r2) = (ca.roots[k1], ca.roots[k2]);
    let others: Vec<C64> =
        ca.roots.iter().enumerate().filter(|(j, _)| *j != k1 && *j != k2).map(|(_, r)| *r).collect();
    let tpi = C64::new(0.0, 2.0 * PI);
    let c = ca.lead * (r2 - r1) / tpi;
    let term = FormTerm { coeff: c, theta: fr.theta, exps: (ca.m + 1 - fr.shift.0, -fr.shift.1), roots: others.clone() };
    let n = frame_n(fr) as usize;
    let numerator =
        Numerator { phi: expand(c, ca.m, &others), a: ca.coeffs.clone(), index: n, poles: vec![(r2, tpi.inv()), (r1, -tpi.inv())] };
    Ok(DifferentialSpec { kind: FormKind::OmegaF, label: "omega_f".into(), terms: vec![term], numerator: Some(numerator) })
}
