use num_complex::Complex64 as C64;
use tropint::numverify::cycles::{alpha_cycle, beta_path, cylinder_path, integrate_path, winding_y, CurveContext, RAY_REFERENCE};
use tropint::numverify::forms::{omega_e_spec, omega_f_spec};
use tropint::numverify::report::{leaf_pair, period_matrix_numeric, residue_table, theorem_report};
use tropint::numverify::{shadow_offset, NumError, TrackedPath, SHADOW_BAND};
use tropint::periods::{candidate_frames, cycle_basis, WorkingFrame};
use tropint::plpoly::parse;
use tropint::puiseux::q_to_f64;
use tropint::tropcurve::{verticalizing_theta, Cell};

const EX1: &str = "(x+e)*y^2+(x+e^2)*(x+e^3)*y+e^8";
const EX2: &str = "y^3+(x+e^4)*y^2+e^2*(x+e)*(x+2*e)*y+e^10";

fn edge_len(cx: &CurveContext, e: usize) -> f64 {
    q_to_f64(cx.t.edges[e].lattice_length)
}

fn vertical_edge(cx: &CurveContext) -> usize {
    (0..cx.t.edges.len()).find(|&e| cx.t.edges[e].primitive.0 == 0).unwrap()
}

fn max_residual(cx: &CurveContext, p: &TrackedPath) -> f64 {
    p.pieces.iter().flat_map(|pc| pc.samples.iter()).map(|s| cx.sp.rel_residual(&s.1)).fold(0.0, f64::max)
}

/// Tropical curve as a list of segments; rays are cut at length 3.
fn skeleton(cx: &CurveContext) -> Vec<((f64, f64), (f64, f64))> {
    let t = &cx.t;
    let mut v = Vec::new();
    for (i, e) in t.edges.iter().enumerate() {
        let l = q_to_f64(e.lattice_length);
        v.push((cx.point_on(Cell::Edge(i), 0.0), cx.point_on(Cell::Edge(i), l)));
    }
    for i in 0..t.rays.len() {
        v.push((cx.point_on(Cell::Ray(i), 0.0), cx.point_on(Cell::Ray(i), 3.0)));
    }
    v
}

fn seg_dist(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let t = (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
    (p.0 - a.0 - t * dx).hypot(p.1 - a.1 - t * dy)
}

#[test]
fn y_winding_of_vertical_alpha_loop_is_one() {
    for src in [EX1, EX2] {
        let f = parse(src).unwrap();
        let cx = CurveContext::new(&f, 0.1).unwrap();
        let e = vertical_edge(&cx);
        let p = alpha_cycle(&cx, Cell::Edge(e), 0, 1, 0.5 * edge_len(&cx, e)).unwrap();
        assert!(p.closed);
        assert!((winding_y(&p) - 1.0).norm() < 1e-6, "{}", winding_y(&p));
        let s = p.samples();
        let (a, b) = (s[0], s[s.len() - 1]);
        assert!((a.1 - b.1).norm() <= 1e-8 * a.1.norm() && (a.2 - b.2).norm() <= 1e-8 * a.2.norm());
    }
}

#[test]
fn doubled_edge_alpha_loops_are_disjoint() {
    let f = parse(EX2).unwrap();
    let cx = CurveContext::new(&f, 0.1).unwrap();
    let e = (0..cx.t.edges.len()).find(|&e| cx.t.edges[e].seg.roots.len() == 2).unwrap();
    let s = 0.5 * edge_len(&cx, e);
    let a = alpha_cycle(&cx, Cell::Edge(e), 0, 1, s).unwrap().samples();
    let b = alpha_cycle(&cx, Cell::Edge(e), 1, 1, s).unwrap().samples();
    let mut d = f64::INFINITY;
    for p in &a {
        for q in &b {
            d = d.min(((p.1 - q.1).norm() / p.1.norm()).max((p.2 - q.2).norm() / p.2.norm()));
        }
    }
    assert!(d > 1e-3, "copies come within relative distance {d:e}");
}

#[test]
fn beta_paths_close_and_follow_the_curve() {
    for src in [EX1, EX2] {
        let f = parse(src).unwrap();
        for eps in [0.1, 0.05] {
            let cx = CurveContext::new(&f, eps).unwrap();
            let skel = skeleton(&cx);
            for cyc in cycle_basis(&cx.g) {
                let p = beta_path(&cx, &cyc).unwrap();
                assert!(p.closed, "{src} at {eps}");
                assert!(max_residual(&cx, &p) < 1e-8);
                let off = p
                    .shadow()
                    .into_iter()
                    .map(|q| skel.iter().map(|(a, b)| seg_dist(q, *a, *b)).fold(f64::INFINITY, f64::min))
                    .fold(0.0, f64::max);
                assert!(off < SHADOW_BAND * eps, "{src} at {eps}: shadow offset {off}");
            }
        }
    }
}

#[test]
fn cylinder_paths_shadow_their_edges() {
    let f = parse(EX1).unwrap();
    let eps = 0.05;
    let cx = CurveContext::new(&f, eps).unwrap();
    for e in 0..cx.t.edges.len() {
        let l = edge_len(&cx, e);
        let p = cylinder_path(&cx, Cell::Edge(e), 0, false, 0.1 * l, 0.9 * l).unwrap();
        let shadow = [cx.point_on(Cell::Edge(e), 0.0), cx.point_on(Cell::Edge(e), l)];
        assert!(shadow_offset(&p, &shadow) < SHADOW_BAND * eps);
        assert!(max_residual(&cx, &p) < 1e-8);
    }
}

#[test]
fn omega_e_alpha_periods() {
    let f = parse(EX1).unwrap();
    let eps = 0.1;
    let cx = CurveContext::new(&f, eps).unwrap();
    let e = vertical_edge(&cx);
    let fr = WorkingFrame::new(&f, &cx.t, [[1, 0], [0, 1]]).unwrap();
    let floor = fr.floor_of(e).unwrap();
    let b = q_to_f64(fr.vertical_ends(e).0.x);
    let on = cx.seed_at(Cell::Edge(e), 0, 0.5 * edge_len(&cx, e)).unwrap();
    let spec = omega_e_spec(&fr, eps, e, &on).unwrap();
    for l in 0..cx.t.edges.len() {
        let p = alpha_cycle(&cx, Cell::Edge(l), 0, 1, 0.5 * edge_len(&cx, l)).unwrap();
        let v = integrate_path(&cx, &[&spec], &p).unwrap()[0];
        let x = q_to_f64(fr.curve.edge_midpoint(l).x);
        let expected = if l == e {
            1.0
        } else if fr.edge_on_graph(l, floor) && x < b {
            // multiplicity one throughout Example I
            1.0
        } else {
            0.0
        };
        assert!((v - expected).norm() < 0.1, "edge {l}: {v} vs {expected}");
    }
}

#[test]
fn omega_e_vanishes_on_distant_levels() {
    let f = parse(EX1).unwrap();
    let eps = 0.1;
    let cx = CurveContext::new(&f, eps).unwrap();
    let mut checked = 0;
    for th in candidate_frames(&cx.t) {
        let fr = WorkingFrame::new(&f, &cx.t, th).unwrap();
        for e in (0..cx.t.edges.len()).filter(|&e| fr.is_vertical(e)) {
            let Ok(i) = fr.floor_of(e) else { continue };
            let on = cx.seed_at(Cell::Edge(e), 0, 0.5 * edge_len(&cx, e)).unwrap();
            let spec = omega_e_spec(&fr, eps, e, &on).unwrap();
            for l in 0..cx.t.edges.len() {
                if fr.is_vertical(l) || fr.edge_on_graph(l, i) || fr.edge_on_graph(l, i + 1) {
                    continue;
                }
                let p = alpha_cycle(&cx, Cell::Edge(l), 0, 1, 0.5 * edge_len(&cx, l)).unwrap();
                let v = integrate_path(&cx, &[&spec], &p).unwrap()[0];
                assert!(v.norm() < 0.1, "frame {th:?}, E{e}, L{l}: {v}");
                checked += 1;
            }
        }
    }
    assert!(checked > 0);
}

#[test]
fn doubled_floor_edge_alpha_sum_is_one() {
    // Left of B on the floor, the copies of a multiplicity-m edge carry 1/m
    // each in total: their sum is 1 up to orientation.
    let f = parse(EX2).unwrap();
    let eps = 0.1;
    let cx = CurveContext::new(&f, eps).unwrap();
    let fr = WorkingFrame::new(&f, &cx.t, [[-1, -1], [0, -1]]).unwrap();
    let e = (0..cx.t.edges.len()).find(|&e| fr.is_vertical(e)).unwrap();
    let i = fr.floor_of(e).unwrap();
    let on = cx.seed_at(Cell::Edge(e), 0, 0.5 * edge_len(&cx, e)).unwrap();
    let spec = omega_e_spec(&fr, eps, e, &on).unwrap();
    let own = integrate_path(&cx, &[&spec], &alpha_cycle(&cx, Cell::Edge(e), 0, 1, 0.5 * edge_len(&cx, e)).unwrap()).unwrap()[0];
    let l = (0..cx.t.edges.len()).find(|&l| l != e && fr.edge_on_graph(l, i)).unwrap();
    let m = cx.t.edges[l].seg.roots.len();
    assert_eq!(m, 2);
    let sum: C64 = (0..m)
        .map(|k| {
            let p = alpha_cycle(&cx, Cell::Edge(l), k, 1, 0.5 * edge_len(&cx, l)).unwrap();
            integrate_path(&cx, &[&spec], &p).unwrap()[0]
        })
        .sum();
    assert!((own.norm() - 1.0).abs() < 0.1);
    assert!((sum.norm() - 1.0).abs() < 0.1, "{sum}");
}

#[test]
fn numerators_satisfy_their_identities() {
    let xs: Vec<C64> = (0..20).map(|k| C64::from_polar(0.2 + 0.37 * k as f64, 0.9 * k as f64 + 0.1)).collect();
    for src in [EX1, EX2] {
        let f = parse(src).unwrap();
        let eps = 0.1;
        let cx = CurveContext::new(&f, eps).unwrap();
        for th in candidate_frames(&cx.t) {
            let fr = WorkingFrame::new(&f, &cx.t, th).unwrap();
            for e in (0..cx.t.edges.len()).filter(|&e| fr.is_vertical(e)) {
                if fr.floor_of(e).is_err() {
                    continue;
                }
                let on = cx.seed_at(Cell::Edge(e), 0, 0.5 * edge_len(&cx, e)).unwrap();
                let spec = omega_e_spec(&fr, eps, e, &on).unwrap();
                assert!(spec.numerator.unwrap().identity_error(&xs) < 1e-8);
            }
        }
        let ray = leaf_pair(&cx.t).unwrap();
        let fr = WorkingFrame::new(&f, &cx.t, verticalizing_theta(cx.t.rays[ray].direction)).unwrap();
        let pp = cx.seed_at(Cell::Ray(ray), 0, RAY_REFERENCE).unwrap();
        let pm = cx.seed_at(Cell::Ray(ray), 1, RAY_REFERENCE).unwrap();
        let spec = omega_f_spec(&fr, eps, &pp, &pm).unwrap();
        assert!(spec.numerator.unwrap().identity_error(&xs) < 1e-8);
    }
}

#[test]
fn residues_at_horns() {
    let f = parse(EX1).unwrap();
    let t = tropint::tropcurve::tropicalize(&f).unwrap();
    let ray = leaf_pair(&t).unwrap();
    let rows = residue_table(&f, ray, &[0.1]).unwrap();
    let mut total = C64::new(0.0, 0.0);
    for r in &rows {
        assert!(r.deviation < 0.05, "ray {} copy {}: {}", r.ray, r.copy, r.value);
        total += r.value;
    }
    assert!(total.norm() < 1e-6, "residues sum to {total}");
}

#[test]
fn alpha_matrix_is_near_identity() {
    for src in [EX1, EX2] {
        let f = parse(src).unwrap();
        let cx = CurveContext::new(&f, 0.1).unwrap();
        let np = period_matrix_numeric(&cx).unwrap();
        let g = np.a.nrows();
        for i in 0..g {
            for j in 0..g {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((np.a[(i, j)] - want).norm() < 0.1, "{src}: A[{i}{j}] = {}", np.a[(i, j)]);
            }
        }
    }
}

#[test]
fn theorem_refuses_bad_tropicalization() {
    let f = parse("y^2 + x*y + (x+e)*(x+e)").unwrap();
    match theorem_report(&f, &[0.2, 0.1], 1.0) {
        Err(NumError::Gate(msg)) => assert!(msg.contains("genericness"), "{msg}"),
        other => panic!("expected gate refusal, got {:?}", other.map(|r| r.verdict)),
    }
}

#[test]
fn unsorted_grid_is_rejected() {
    let f = parse(EX1).unwrap();
    assert!(theorem_report(&f, &[0.1, 0.2], 1.0).is_err());
    assert!(theorem_report(&f, &[0.1, 1.5], 1.0).is_err());
}

#[test]
fn poles_without_residue_are_negligible() {
    // x^k·ω_E for k ≤ −1 around horns far to the left of the curve
    let f = parse(EX1).unwrap();
    let fr_theta = [[1, 0], [0, 1]];
    let mut seen = Vec::new();
    let mut checked = 0;
    for eps in [0.2, 0.1, 0.05] {
        let cx = CurveContext::new(&f, eps).unwrap();
        let fr = WorkingFrame::new(&f, &cx.t, fr_theta).unwrap();
        let e = vertical_edge(&cx);
        let on = cx.seed_at(Cell::Edge(e), 0, 0.5 * edge_len(&cx, e)).unwrap();
        let mut spec = omega_e_spec(&fr, eps, e, &on).unwrap();
        let mut worst: f64 = 0.0;
        for k in [-1i64, -2] {
            spec.terms.iter_mut().for_each(|t| t.exps.0 -= 1);
            for r in (0..cx.t.rays.len()).filter(|&r| cx.t.rays[r].direction.0 < 0) {
                for copy in 0..cx.t.rays[r].seg.roots.len() {
                    let p = alpha_cycle(&cx, Cell::Ray(r), copy, 1, 3.0).unwrap();
                    let v = integrate_path(&cx, &[&spec], &p).unwrap()[0];
                    worst = worst.max(v.norm());
                    checked += 1;
                    assert!(v.norm() < 0.05, "k = {k}, ray {r}.{copy} at ε = {eps}: {v}");
                }
            }
        }
        seen.push(worst);
    }
    assert!(checked > 0);
    assert!(seen.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{seen:?}");
}
