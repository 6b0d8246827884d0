//! Complex univariate root finding (Aberth–Ehrlich) and root clustering.

use num_complex::Complex64;

type C64 = Complex64;

const MAX_ITER: usize = 800;

/// Evaluates `p(z)` and `p'(z)` for ascending coefficients.
pub fn horner(coeffs: &[C64], z: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All roots of `Σ coeffs[k] z^k`, with multiplicity.
///
/// Leading and trailing zero coefficients are stripped first; trailing zeros
/// contribute exact zero roots. Initial guesses come from the upper Newton
/// polygon of `log|c_k|`, which keeps wide magnitude spreads well conditioned.
pub fn poly_roots(coeffs: &[C64]) -> Vec<C64> {
    let mut hi = coeffs.len();
    while hi > 0 && coeffs[hi - 1] == C64::new(0.0, 0.0) {
        hi -= 1;
    }
    if hi == 0 {
        return Vec::new();
    }
    let mut lo = 0;
    while coeffs[lo] == C64::new(0.0, 0.0) {
        lo += 1;
    }
    let mut out = vec![C64::new(0.0, 0.0); lo];
    let p = &coeffs[lo..hi];
    let n = p.len() - 1;
    if n == 0 {
        return out;
    }
    if n == 1 {
        out.push(-p[0] / p[1]);
        return out;
    }
    let mut z = initial_guesses(p);
    let dp: Vec<C64> = (1..=n).map(|k| p[k] * k as f64).collect();
    let mut done = vec![false; n];
    for _ in 0..MAX_ITER {
        let mut all = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (v, _) = horner(p, z[i]);
            let (d, _) = horner(&dp, z[i]);
            let ratio = if d.norm() == 0.0 { C64::new(1e-3, 1e-3) } else { v / d };
            let mut s = C64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    let diff = z[i] - z[j];
                    if diff.norm() > 0.0 {
                        s += 1.0 / diff;
                    }
                }
            }
            let denom = C64::new(1.0, 0.0) - ratio * s;
            let w = if denom.norm() == 0.0 { ratio } else { ratio / denom };
            z[i] -= w;
            if w.norm() <= 1e-15 * z[i].norm().max(1e-300) {
                done[i] = true;
            } else {
                all = false;
            }
        }
        if all {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (v, d) = horner(p, *zi);
            if d.norm() == 0.0 {
                break;
            }
            let step = v / d;
            if !step.re.is_finite() || !step.im.is_finite() {
                break;
            }
            let cand = *zi - step;
            if horner(p, cand).0.norm() <= v.norm() {
                *zi = cand;
            } else {
                break;
            }
        }
    }
    out.extend(z);
    out
}

fn initial_guesses(p: &[C64]) -> Vec<C64> {
    let n = p.len() - 1;
    let pts: Vec<(usize, f64)> = p
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(k, c)| (k, c.norm().ln()))
        .collect();
    // upper hull of (k, log|c_k|)
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &q in &pts {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (b.0 as f64 - a.0 as f64) * (q.1 - a.1) - (b.1 - a.1) * (q.0 as f64 - a.0 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(q);
    }
    let mut z = Vec::with_capacity(n);
    let mut offset = 0.0;
    for w in hull.windows(2) {
        let (k0, l0) = w[0];
        let (k1, l1) = w[1];
        let cnt = k1 - k0;
        let r = ((l0 - l1) / cnt as f64).exp();
        for j in 0..cnt {
            let ang = 2.0 * std::f64::consts::PI * (j as f64) / (cnt as f64) + offset + 0.4;
            z.push(C64::from_polar(r, ang));
        }
        offset += 0.7;
    }
    z
}

/// Groups roots whose mutual distance is below `tol` relative to their
/// magnitude. Returns (representative, multiplicity) sorted by (re, im).
pub fn cluster(roots: &[C64], tol: f64) -> Vec<(C64, usize)> {
    let mut out: Vec<(C64, usize, C64)> = Vec::new();
    for &r in roots {
        let mut hit = None;
        for (i, (_, _, sum)) in out.iter().enumerate() {
            let rep = *sum / out[i].1 as f64;
            if (rep - r).norm() <= tol * rep.norm().max(r.norm()).max(1e-300) {
                hit = Some(i);
                break;
            }
        }
        match hit {
            Some(i) => {
                out[i].1 += 1;
                out[i].2 += r;
            }
            None => out.push((r, 1, r)),
        }
    }
    let mut v: Vec<(C64, usize)> = out.into_iter().map(|(_, m, s)| (s / m as f64, m)).collect();
    sort_complex(&mut v);
    v
}

/// Deterministic ordering: by real part, then imaginary part, with a small
/// tolerance so that conjugate pairs order stably.
pub fn sort_complex<T>(v: &mut [(C64, T)]) {
    v.sort_by(|a, b| cmp_complex(a.0, b.0));
}

pub fn cmp_complex(a: C64, b: C64) -> std::cmp::Ordering {
    let scale = a.norm().max(b.norm()).max(1e-300);
    if (a.re - b.re).abs() > 1e-9 * scale {
        a.re.partial_cmp(&b.re).unwrap_or(std::cmp::Ordering::Equal)
    } else {
        a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal)
    }
}

/// Refines a root of multiplicity `mu` as a simple root of the
/// `(mu-1)`-th derivative.
pub fn polish_multiple(coeffs: &[C64], z: C64, mu: usize) -> C64 {
    let mut d: Vec<C64> = coeffs.to_vec();
    for _ in 1..mu {
        d = (1..d.len()).map(|k| d[k] * k as f64).collect();
    }
    let mut z = z;
    for _ in 0..8 {
        let (v, dv) = horner(&d, z);
        if dv.norm() == 0.0 || v.norm() == 0.0 {
            break;
        }
        let step = v / dv;
        if !step.re.is_finite() || !step.im.is_finite() {
            break;
        }
        z -= step;
        if step.norm() <= 1e-16 * z.norm() {
            break;
        }
    }
    z
}

/// Smallest relative gap between distinct clusters, used to flag ambiguous
/// clustering decisions.
pub fn min_relative_gap(reps: &[(C64, usize)]) -> f64 {
    let mut g = f64::INFINITY;
    for i in 0..reps.len() {
        for j in i + 1..reps.len() {
            let a = reps[i].0;
            let b = reps[j].0;
            g = g.min((a - b).norm() / a.norm().max(b.norm()).max(1e-300));
        }
    }
    g
}
