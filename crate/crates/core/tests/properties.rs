use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tropint::periods::{cycle_basis, slope_length, path_length_form, period_matrix, Path};
use tropint::plpoly::{
    affine_transform_poly, delta_norm, genericness_check, parse, q_transform, theta_set, tropical_val, truncation,
    LatticePoint, Mat2, PLPolynomial, QPoint,
};
use tropint::puiseux::{
    add, mul, newton_puiseux_roots, q, qi, residual_valuation, val, PuiseuxSeries, UnivariateSeriesPoly, Q,
};
use tropint::tropcurve::{
    condition_one, condition_two, expand_multiplicities, expanded_genus, graph_genus, is_unimodular, level_functions,
    tropicalize, TropicalCurve,
};

const EX1: &str = "(x+e)*y^2+(x+e^2)*(x+e^3)*y+e^8";
const EX2: &str = "y^3+(x+e^4)*y^2+e^2*(x+e)*(x+2*e)*y+e^10";

const CORPUS: [&str; 7] = [
    EX1,
    EX2,
    "x+y+1",
    "y^2+(x+e)*y+e^3*x^2",
    "x^3+y^3+1+e*x*y",
    "y^2+(x^2+e*x+e^3)*y+e^2*x",
    "(x+1)*y^2+(x+e^2)*y+e^5*(x+3)",
];

fn cfg() -> ProptestConfig {
    ProptestConfig { cases: 64, ..ProptestConfig::default() }
}

// ------------------------------------------------------------ generators

fn unit() -> impl Strategy<Value = C64> {
    prop::sample::select(vec![
        C64::new(1.0, 0.0),
        C64::new(-1.0, 0.0),
        C64::new(2.0, 0.0),
        C64::new(-3.0, 0.0),
        C64::new(0.5, 1.0),
        C64::new(0.0, -2.0),
    ])
}

fn series() -> impl Strategy<Value = PuiseuxSeries> {
    prop::collection::vec((0i64..16, unit()), 1..5)
        .prop_map(|t| PuiseuxSeries::from_terms(t.into_iter().map(|(e, c)| (q(e, 2), c)), None))
        .prop_filter("terms may cancel", |s| !s.is_zero())
}

/// Random polynomial on a subset of the box [0,3]² with monomial coefficients.
fn poly() -> impl Strategy<Value = PLPolynomial> {
    prop::collection::btree_map((0i64..4, 0i64..4), (0i64..9, unit()), 3..9).prop_map(|m| {
        PLPolynomial::new(
            m.into_iter()
                .map(|((a, b), (v, c))| (LatticePoint::new(a, b), PuiseuxSeries::monomial(c, qi(v))))
                .collect(),
        )
    })
}

fn curve_of(f: &PLPolynomial) -> Option<TropicalCurve> {
    tropicalize(f).ok().filter(|t| !t.vertices.is_empty())
}

fn rational_point() -> impl Strategy<Value = QPoint> {
    (-60i64..60, -60i64..60).prop_map(|(a, b)| QPoint::new(q(a, 6), q(b, 6)))
}

// ------------------------------------------------------------ exact geometry

fn cross(a: QPoint, b: (Q, Q), p: QPoint) -> Q {
    b.0 * (p.y - a.y) - b.1 * (p.x - a.x)
}

fn on_segment(a: QPoint, b: QPoint, p: QPoint) -> bool {
    cross(a, (b.x - a.x, b.y - a.y), p).is_zero()
        && p.x >= a.x.min(b.x)
        && p.x <= a.x.max(b.x)
        && p.y >= a.y.min(b.y)
        && p.y <= a.y.max(b.y)
}

fn on_ray(a: QPoint, d: (i64, i64), p: QPoint) -> bool {
    let d = (qi(d.0), qi(d.1));
    cross(a, d, p).is_zero() && (p.x - a.x) * d.0 + (p.y - a.y) * d.1 >= Q::zero()
}

fn on_curve(t: &TropicalCurve, p: QPoint) -> bool {
    t.edges.iter().any(|e| on_segment(t.vertices[e.v0].pos, t.vertices[e.v1].pos, p))
        || t.rays.iter().any(|r| on_ray(t.vertices[r.vertex].pos, r.direction, p))
}

/// Vertices, edge midpoints and one point per ray.
fn samples(t: &TropicalCurve) -> Vec<QPoint> {
    let mut v: Vec<QPoint> = t.vertices.iter().map(|v| v.pos).collect();
    v.extend((0..t.edges.len()).map(|e| t.edge_midpoint(e)));
    v.extend((0..t.rays.len()).map(|r| t.ray_point(r, qi(1))));
    v
}

fn random_unimodular(rng: &mut ChaCha8Rng) -> Mat2 {
    let mut m: Mat2 = [[1, 0], [0, 1]];
    for _ in 0..3 {
        let k: i64 = rng.gen_range(-2..=2);
        let e: Mat2 = match rng.gen_range(0..3) {
            0 => [[1, k], [0, 1]],
            1 => [[1, 0], [k, 1]],
            _ => [[0, -1], [1, 0]],
        };
        m = [
            [m[0][0] * e[0][0] + m[0][1] * e[1][0], m[0][0] * e[0][1] + m[0][1] * e[1][1]],
            [m[1][0] * e[0][0] + m[1][1] * e[1][0], m[1][0] * e[0][1] + m[1][1] * e[1][1]],
        ];
    }
    m
}

fn sorted<T: PartialOrd>(mut v: Vec<T>) -> Vec<T> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

// ------------------------------------------------------------ puiseux

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn valuation_is_non_archimedean(a in series(), b in series()) {
        let (va, vb) = (val(&a).unwrap(), val(&b).unwrap());
        prop_assert_eq!(val(&mul(&a, &b)), Some(va + vb));
        let s = add(&a, &b);
        if let Some(vs) = val(&s) {
            prop_assert!(vs >= va.min(vb));
            if va != vb {
                prop_assert_eq!(vs, va.min(vb));
            }
        }
    }

    #[test]
    fn evaluation_respects_products(a in series(), b in series()) {
        let eps = 0.7;
        let lhs = mul(&a, &b).eval_at(eps);
        let rhs = a.eval_at(eps) * b.eval_at(eps);
        prop_assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1e-300));
    }

    #[test]
    fn newton_puiseux_roots_resubstitute(roots in prop::collection::vec((0i64..8, unit()), 1..4)) {
        // p = Π (y − c·ẽ^v): every slope of the Newton polygon is finite.
        let mut p = vec![PuiseuxSeries::one()];
        for (v, c) in &roots {
            let r = PuiseuxSeries::monomial(*c, qi(*v));
            let mut next = vec![PuiseuxSeries::zero(); p.len() + 1];
            for (k, a) in p.iter().enumerate() {
                next[k + 1] = add(&next[k + 1], a);
                next[k] = add(&next[k], &mul(a, &r).scale(C64::new(-1.0, 0.0)));
            }
            p = next;
        }
        let poly = UnivariateSeriesPoly::new(p);
        let order = qi(12);
        let found = newton_puiseux_roots(&poly, order).unwrap();
        prop_assert_eq!(found.len(), roots.len());
        for r in &found {
            if let Some(v) = residual_valuation(&poly, r) {
                prop_assert!(v >= order, "residual valuation {} below {}", v, order);
            }
        }
    }
}

// ------------------------------------------------------------ plpoly

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn q_transform_moves_the_query_to_the_origin(f in poly(), p in rational_point()) {
        let g = q_transform(&f, &p);
        prop_assert_eq!(tropical_val(&f, &p), tropical_val(&g, &QPoint::origin()));
        let (a, b) = (truncation(&f, &p), truncation(&g, &QPoint::origin()));
        prop_assert_eq!(&a.theta, &b.theta);
        for (w, c) in &a.main {
            prop_assert!((b.main[w] - c).norm() <= 1e-12 * c.norm());
        }
    }

    #[test]
    fn theta_has_two_points_exactly_on_the_curve(f in poly(), p in rational_point()) {
        let Some(t) = curve_of(&f) else { return Ok(()) };
        prop_assert_eq!(theta_set(&f, &p).len() >= 2, on_curve(&t, p));
    }

    #[test]
    fn delta_norm_shrinks_with_eps(f in poly()) {
        let Some(t) = curve_of(&f) else { return Ok(()) };
        for p in samples(&t) {
            let d: Vec<f64> = [0.2, 0.1, 0.05].iter().map(|&e| delta_norm(&f, &p, e)).collect();
            prop_assert!(d[1] <= d[0] && d[2] <= d[1], "{:?} at {:?}", d, p);
        }
    }
}

// ------------------------------------------------------------ tropcurve

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn theta_cardinality_law(f in poly()) {
        let Some(t) = curve_of(&f) else { return Ok(()) };
        for v in &t.vertices {
            prop_assert!(theta_set(&f, &v.pos).len() >= 3);
        }
        for e in 0..t.edges.len() {
            prop_assert!(theta_set(&f, &t.edge_midpoint(e)).len() >= 2);
        }
        for r in 0..t.rays.len() {
            prop_assert!(theta_set(&f, &t.ray_point(r, qi(1))).len() >= 2);
        }
    }

    #[test]
    fn level_data_reconstructs_the_curve(f in poly(), xs in prop::collection::vec(-40i64..40, 4)) {
        let Some(t) = curve_of(&f) else { return Ok(()) };
        let lf = level_functions(&f).unwrap();
        let on_level = |p: QPoint| {
            !lf.graphs_through(p).is_empty()
                || lf.vertical.iter().any(|s| s.x == p.x && s.y0.map_or(true, |y| y <= p.y) && s.y1.map_or(true, |y| p.y <= y))
        };
        for p in samples(&t) {
            prop_assert!(on_level(p), "curve point {:?} missing from level data", p);
        }
        for x in xs {
            let x = q(x, 4);
            for i in 1..=lf.n {
                if let Some(y) = lf.level(i, x) {
                    prop_assert!(on_curve(&t, QPoint::new(x, y)), "graph {} at {}", i, x);
                }
            }
        }
        for s in &lf.vertical {
            let y = match (s.y0, s.y1) {
                (Some(a), Some(b)) => (a + b) / qi(2),
                (Some(a), None) => a + qi(1),
                (None, Some(b)) => b - qi(1),
                (None, None) => qi(0),
            };
            prop_assert!(on_curve(&t, QPoint::new(s.x, y)));
        }
    }

    #[test]
    fn duality_and_balancing(f in poly()) {
        let Some(t) = curve_of(&f) else { return Ok(()) };
        prop_assert_eq!(t.vertices.len(), t.dual_cells.len());
        let mut dual_edges = std::collections::BTreeSet::new();
        for e in &t.edges {
            dual_edges.insert(e.seg.theta.clone());
        }
        for r in &t.rays {
            dual_edges.insert(r.seg.theta.clone());
        }
        prop_assert_eq!(dual_edges.len(), t.edges.len() + t.rays.len());
        for v in 0..t.vertices.len() {
            let (mut sx, mut sy) = (0i64, 0i64);
            for (c, d) in t.incident(v) {
                let s = t.segment(c);
                let w = s.vthick.gcd(&s.hthick);
                sx += w * d.0;
                sy += w * d.1;
            }
            prop_assert_eq!((sx, sy), (0, 0), "vertex {} unbalanced", v);
        }
    }

    #[test]
    fn truncation_is_constant_on_cells(f in poly()) {
        let Some(t) = curve_of(&f) else { return Ok(()) };
        for (i, e) in t.edges.iter().enumerate() {
            let (a, b) = (t.vertices[e.v0].pos, t.vertices[e.v1].pos);
            let p1 = t.edge_midpoint(i);
            let p2 = QPoint::new((a.x * qi(2) + b.x) / qi(3), (a.y * qi(2) + b.y) / qi(3));
            let (m1, m2) = (truncation(&f, &p1).main, truncation(&f, &p2).main);
            prop_assert_eq!(m1.keys().collect::<Vec<_>>(), m2.keys().collect::<Vec<_>>());
            for (w, c) in &m1 {
                prop_assert!((m2[w] - c).norm() <= 1e-12 * c.norm());
            }
        }
    }

    #[test]
    fn edge_length_matches_slope_identity(f in poly()) {
        let Some(t) = curve_of(&f) else { return Ok(()) };
        for (i, e) in t.edges.iter().enumerate() {
            if e.primitive.0 != 0 {
                prop_assert_eq!(slope_length(&t, i), Some(e.lattice_length), "edge {}", i);
            }
        }
    }
}

#[test]
fn sl2_invariance_under_twenty_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for src in CORPUS {
        let f = parse(src).unwrap();
        let t = tropicalize(&f).unwrap();
        let lengths = sorted(t.edges.iter().map(|e| e.lattice_length).collect());
        let mults = sorted(t.edges.iter().map(|e| e.seg.mult).chain(t.rays.iter().map(|r| r.seg.mult)).collect());
        for _ in 0..20 {
            let th = random_unimodular(&mut rng);
            assert!(is_unimodular(&th));
            let g = affine_transform_poly(&f, &th).unwrap();
            let u = tropicalize(&g).unwrap();
            assert_eq!(graph_genus(&u), graph_genus(&t), "{src} under {th:?}");
            assert_eq!(expanded_genus(&u).unwrap(), expanded_genus(&t).unwrap());
            assert_eq!(sorted(u.edges.iter().map(|e| e.lattice_length).collect()), lengths);
            let um = sorted(u.edges.iter().map(|e| e.seg.mult).chain(u.rays.iter().map(|r| r.seg.mult)).collect());
            assert_eq!(um, mults);
        }
    }
}

#[test]
fn implication_chain_on_corpus() {
    for src in CORPUS {
        let f = parse(src).unwrap();
        let t = tropicalize(&f).unwrap();
        let generic = genericness_check(&f, false).unwrap().pass;
        let segs: Vec<_> = t.edges.iter().map(|e| &e.seg).chain(t.rays.iter().map(|r| &r.seg)).collect();
        let two = segs.iter().all(|s| condition_two(s));
        let one = segs.iter().all(|s| condition_one(s));
        assert!(!generic || two, "{src}: generic but Condition II fails");
        assert!(!two || one, "{src}: Condition II holds but Condition I fails");
    }
}

// ------------------------------------------------------------ periods

/// Polynomials y² + a(x)y + b(x) with deg b = 6; the convex lift makes
/// genus two the common case.
fn hyperelliptic() -> impl Strategy<Value = PLPolynomial> {
    (prop::collection::vec(0i64..3, 4), prop::collection::vec(0i64..3, 7), prop::collection::vec(unit(), 11)).prop_map(
        |(a, b, u)| {
            let mut m = BTreeMap::new();
            m.insert(LatticePoint::new(0, 2), PuiseuxSeries::one());
            for (k, v) in a.iter().enumerate() {
                let lift = qi(*v + [2, 0, 0, 2][k]);
                m.insert(LatticePoint::new(k as i64, 1), PuiseuxSeries::monomial(u[k], lift));
            }
            for (k, v) in b.iter().enumerate() {
                let lift = qi(*v + 2 * (k as i64 - 3).pow(2) + 2);
                m.insert(LatticePoint::new(k as i64, 0), PuiseuxSeries::monomial(u[4 + k], lift));
            }
            PLPolynomial::new(m)
        },
    )
}

fn combine(basis: &[Path], u: &[Vec<i64>]) -> Vec<Path> {
    u.iter()
        .map(|row| row.iter().zip(basis).fold(Path::default(), |acc, (c, p)| acc.plus(&p.scaled(*c))))
        .collect()
}

fn random_unimodular_n(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<i64>> {
    let mut u: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    for _ in 0..4 * n {
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if i == j {
            u[i].iter_mut().for_each(|x| *x = -*x);
            continue;
        }
        let k: i64 = rng.gen_range(-2..=2);
        let rj = u[j].clone();
        for (x, y) in u[i].iter_mut().zip(rj) {
            *x += k * y;
        }
    }
    u
}

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn tropical_period_matrix_is_spd_and_covariant(f in hyperelliptic(), seed in 0u64..1000) {
        let Some(t) = curve_of(&f) else { return Ok(()) };
        let Ok(g) = expand_multiplicities(&t) else { return Ok(()) };
        let basis = cycle_basis(&g);
        prop_assume!(!basis.is_empty());
        let b = period_matrix(&g, &basis).unwrap().entries;
        let n = b.len();
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(b[i][j], b[j][i]);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_unimodular_n(n, &mut rng);
        let b2 = period_matrix(&g, &combine(&basis, &u)).unwrap().entries;
        for i in 0..n {
            for j in 0..n {
                let mut s = Q::zero();
                for k in 0..n {
                    for l in 0..n {
                        s += qi(u[i][k] * u[j][l]) * b[k][l];
                    }
                }
                prop_assert_eq!(b2[i][j], s);
            }
        }
        let gamma = combine(&basis, &[(0..n).map(|_| rng.gen_range(-3i64..=3)).collect()]).remove(0);
        let form = path_length_form(&g, &gamma, &gamma);
        prop_assert!(form >= Q::zero());
        prop_assert_eq!(form.is_zero(), gamma.chain.values().all(|c| *c == 0));
    }
}

#[test]
fn hyperelliptic_generator_reaches_genus_two() {
    // guards the period property against only ever seeing genus ≤ 1
    let f = parse("y^2+(e^2+x+x^2+e^2*x^3)*y+e^20+e^12*x+e^6*x^2+e^2*x^3+e^6*x^4+e^12*x^5+e^20*x^6").unwrap();
    let t = tropicalize(&f).unwrap();
    assert_eq!(expanded_genus(&t).unwrap(), 2);
    let g = expand_multiplicities(&t).unwrap();
    let b = period_matrix(&g, &cycle_basis(&g)).unwrap();
    assert!(b.entries.iter().flatten().any(|x| x.is_positive()));
}
