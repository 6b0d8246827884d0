//! Fibres of `C_ε` over a fixed `x`, and shadow checks for tracked paths.

use num_traits::Zero;

use super::track::TrackedPath;
use super::{EpsilonContext, NumError};
use crate::plpoly::PLPolynomial;
use crate::puiseux::C64;
use crate::roots;

/// Relative size below which the top coefficient counts as vanishing.
const LEADING_TOL: f64 = 1e-14;

/// All `y` with `f_ε(x, y) = 0`, with multiplicity, Newton-polished.
///
/// Negative `y`-exponents are cleared first, so the count equals the
/// `y`-degree span of `f`. Roots at `y = 0` from a common factor are kept.
pub fn y_roots(f: &PLPolynomial, ctx: &EpsilonContext, x: C64) -> Result<Vec<C64>, NumError> {
    let lo = f.coeffs.keys().map(|w| w.w2).min().unwrap_or(0);
    let hi = f.coeffs.keys().map(|w| w.w2).max().unwrap_or(0);
    let mut c = vec![C64::zero(); (hi - lo + 1) as usize];
    for (w, s) in &f.coeffs {
        c[(w.w2 - lo) as usize] += s.eval_at(ctx.eps) * x.powi(w.w1 as i32);
    }
    let scale = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if c[c.len() - 1].norm() <= LEADING_TOL * scale {
        return Err(NumError::LeadingVanishes(format!("{x}")));
    }
    let mut out = roots::poly_roots(&c);
    for z in &mut out {
        *z = polish(&c, *z);
    }
    Ok(out)
}

fn polish(c: &[C64], mut z: C64) -> C64 {
    for _ in 0..8 {
        let (v, d) = roots::horner(c, z);
        if d.is_zero() {
            break;
        }
        let s = v / d;
        if !(s.re.is_finite() && s.im.is_finite()) || s.norm() > 0.1 * z.norm().max(1e-300) {
            break;
        }
        z -= s;
        if s.norm() <= 1e-15 * z.norm() {
            break;
        }
    }
    z
}

fn seg_dist(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let l2 = dx * dx + dy * dy;
    let t = if l2 == 0.0 { 0.0 } else { (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / l2).clamp(0.0, 1.0) };
    (p.0 - a.0 - t * dx).hypot(p.1 - a.1 - t * dy)
}

/// Largest distance from a sample's tropical shadow to the polyline `shadow`.
pub fn shadow_offset(path: &TrackedPath, shadow: &[(f64, f64)]) -> f64 {
    path.shadow()
        .into_iter()
        .map(|p| match shadow {
            [] => f64::INFINITY,
            [a] => seg_dist(p, *a, *a),
            _ => shadow.windows(2).map(|w| seg_dist(p, w[0], w[1])).fold(f64::INFINITY, f64::min),
        })
        .fold(0.0, f64::max)
}

/// Default band constant: shadows stay within `SHADOW_BAND·ε`.
pub const SHADOW_BAND: f64 = 5.0;
