//! Adaptive Gauss–Kronrod (7/15) quadrature for complex integrands.

use num_traits::Zero;

use crate::puiseux::C64;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One GK15 panel on `[a, b]` for a vector integrand: (Kronrod values,
/// error estimate as the largest component difference).
fn panel<E>(f: &mut impl FnMut(f64) -> Result<Vec<C64>, E>, a: f64, b: f64) -> Result<(Vec<C64>, f64), E> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut k: Vec<C64> = fc.iter().map(|v| v * WGK[7]).collect();
    let mut g: Vec<C64> = fc.iter().map(|v| v * WG[3]).collect();
    for j in 0..7 {
        let dx = h * XGK[j];
        let lo = f(c - dx)?;
        let hi = f(c + dx)?;
        for i in 0..k.len() {
            let s = lo[i] + hi[i];
            k[i] += s * WGK[j];
            if j % 2 == 1 {
                g[i] += s * WG[j / 2];
            }
        }
    }
    let err = k.iter().zip(&g).fold(0.0f64, |m, (x, y)| m.max(((x - y) * h).norm()));
    Ok((k.into_iter().map(|v| v * h).collect(), err))
}

/// Outcome of [`integrate`].
#[derive(Clone, Debug)]
pub struct QuadResult {
    pub value: Vec<C64>,
    pub error: f64,
    pub converged: bool,
}

/// Integrates the vector function `f` over `[a, b]`, bisecting until each
/// panel meets `max(rel·‖I‖, abs)` in proportion to its width.
pub fn integrate<E>(
    mut f: impl FnMut(f64) -> Result<Vec<C64>, E>,
    a: f64,
    b: f64,
    rel: f64,
    abs: f64,
) -> Result<QuadResult, E> {
    let (v0, _) = panel(&mut f, a, b)?;
    let scale = v0.iter().fold(0.0f64, |m, v| m.max(v.norm())).max(abs);
    let tol = (rel * scale).max(abs);
    let mut stack = vec![(a, b, 0usize)];
    let mut value = vec![C64::zero(); v0.len()];
    let mut error = 0.0;
    let mut converged = true;
    while let Some((lo, hi, depth)) = stack.pop() {
        let (v, e) = panel(&mut f, lo, hi)?;
        let width = (hi - lo) / (b - a);
        if e <= tol * width.max(1e-3) || depth >= 40 {
            converged &= e <= tol * width.max(1e-3);
            for (acc, x) in value.iter_mut().zip(v) {
                *acc += x;
            }
            error += e;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    Ok(QuadResult { value, error, converged })
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar<E>(
    mut f: impl FnMut(f64) -> Result<C64, E>,
    a: f64,
    b: f64,
    rel: f64,
    abs: f64,
) -> Result<(C64, bool), E> {
    let r = integrate(|t| f(t).map(|v| vec![v]), a, b, rel, abs)?;
    Ok((r.value[0], r.converged))
}
