use std::fmt::Write as _;

use anyhow::{anyhow, Context};
use serde::Serialize;
use tropint::numverify::report::{cylinder_table, default_threshold, trend_ok, CylinderRecord};
use tropint::numverify::{lift_point, theorem_report, truncation_root, NumError};
use tropint::periods::{alpha_markers, cycle_basis, period_matrix, MetricGraph, Path as Cycle};
use tropint::plpoly::{parse, PLPolynomial, QPoint};
use tropint::puiseux::{C64, PuiseuxSeries, Q};
use tropint::tropcurve::{
    expand_multiplicities, good_tropicalization_check, tropicalize, Cell, GoodTropConfig, TropicalCurve,
};

use crate::config::{RunConfig, Source};
use crate::curve::{rat, CurveJson};
use crate::svg;

/// Exit codes.
pub const OK: u8 = 0;
pub const VERDICT: u8 = 1;
pub const INPUT: u8 = 2;
pub const GATE: u8 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub msg: String,
}

impl Failure {
    pub fn input(e: impl std::fmt::Display) -> Self {
        Self { code: INPUT, msg: format!("{e:#}") }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Self::input(e)
    }
}

pub type Outcome = Result<u8, Failure>;

pub enum Input {
    Poly(PLPolynomial),
    Curve(TropicalCurve),
}

pub fn load(cfg: &RunConfig) -> Result<Input, Failure> {
    let text = match &cfg.source {
        Source::File(p) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        Source::Inline(s) => s.clone(),
    };
    if text.trim_start().starts_with('{') {
        let j: CurveJson = serde_json::from_str(&text).context("parsing curve JSON")?;
        return Ok(Input::Curve(j.to_curve()?));
    }
    parse(text.trim()).map(Input::Poly).map_err(Failure::input)
}

fn need_poly(input: Input, what: &str) -> Result<PLPolynomial, Failure> {
    match input {
        Input::Poly(f) => Ok(f),
        Input::Curve(_) => Err(Failure::input(format!("{what} needs a polynomial, not a curve JSON"))),
    }
}

fn curve_of(input: Input) -> Result<TropicalCurve, Failure> {
    match input {
        Input::Poly(f) => tropicalize(&f).map_err(Failure::input),
        Input::Curve(t) => Ok(t),
    }
}

fn write_out(cfg: &RunConfig, name: &str, body: &str) -> Result<(), Failure> {
    let Some(dir) = &cfg.out else { return Ok(()) };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let p = dir.join(name);
    std::fs::write(&p, body).with_context(|| format!("writing {}", p.display()))?;
    Ok(())
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn cplx(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn cmat(m: &[Vec<C64>]) -> Vec<Vec<[f64; 2]>> {
    m.iter().map(|r| r.iter().map(|z| cplx(*z)).collect()).collect()
}

fn qmat(m: &[Vec<Q>]) -> Vec<Vec<String>> {
    m.iter().map(|r| r.iter().map(|q| rat(*q)).collect()).collect()
}

fn show_q(q: Q) -> String {
    tropint::puiseux::fmt_q(q)
}

fn show_pt(p: QPoint) -> String {
    format!("({}, {})", show_q(p.x), show_q(p.y))
}

/// `[a b; c d]`, or `0×0 (genus 0)`.
pub fn show_matrix(m: &[Vec<Q>]) -> String {
    if m.is_empty() {
        return "0×0 (genus 0)".into();
    }
    let rows: Vec<String> = m.iter().map(|r| r.iter().map(|q| show_q(*q)).collect::<Vec<_>>().join(" ")).collect();
    format!("[{}]", rows.join("; "))
}

// ------------------------------------------------------------ trop

pub fn trop(cfg: &RunConfig) -> Outcome {
    if cfg.svg && cfg.out.is_none() {
        return Err(Failure::input("--svg needs --out DIR"));
    }
    let t = curve_of(load(cfg)?)?;
    let j = CurveJson::from_curve(&t);
    let mut s = String::new();
    let _ = writeln!(s, "vertices: {}", t.vertices.len());
    for (i, v) in t.vertices.iter().enumerate() {
        let _ = writeln!(s, "  v{i} {}", show_pt(v.pos));
    }
    let _ = writeln!(s, "edges: {}", t.edges.len());
    for (i, e) in t.edges.iter().enumerate() {
        let _ = writeln!(
            s,
            "  e{i} v{}-v{} dir ({}, {}) length {} mult {}",
            e.v0,
            e.v1,
            e.primitive.0,
            e.primitive.1,
            show_q(e.lattice_length),
            e.seg.mult
        );
    }
    let _ = writeln!(s, "rays: {}", t.rays.len());
    for (i, r) in t.rays.iter().enumerate() {
        let _ = writeln!(s, "  r{i} from v{} dir ({}, {}) mult {}", r.vertex, r.direction.0, r.direction.1, r.seg.mult);
    }
    if !t.lines.is_empty() {
        let _ = writeln!(s, "lines: {}", t.lines.len());
    }
    let _ = writeln!(s, "graph genus: {}", j.graph_genus);
    match j.expanded_genus {
        Some(g) => {
            let _ = writeln!(s, "expanded genus: {g}");
        }
        None => {
            let _ = writeln!(s, "expanded genus: undefined (multiplicity does not divide thickness)");
        }
    }
    print!("{s}");
    write_out(cfg, "curve.json", &json(&j))?;
    if cfg.svg {
        write_out(cfg, "curve.svg", &svg::render(&t))?;
    }
    Ok(OK)
}

// ------------------------------------------------------------ periods

#[derive(Serialize)]
struct ChainTerm {
    graph_edge: usize,
    edge: usize,
    copy: usize,
    coeff: i64,
}

#[derive(Serialize)]
struct PeriodsJson {
    g: usize,
    #[serde(rename = "B_T")]
    b_t: Vec<Vec<String>>,
    basis: Vec<Vec<ChainTerm>>,
    alpha_markers: Vec<[i64; 2]>,
}

fn chain_json(g: &MetricGraph, c: &Cycle) -> Vec<ChainTerm> {
    c.chain
        .iter()
        .filter(|(_, k)| **k != 0)
        .map(|(e, k)| ChainTerm { graph_edge: *e, edge: g.edges[*e].edge, copy: g.edges[*e].copy, coeff: *k })
        .collect()
}

pub fn periods(cfg: &RunConfig) -> Outcome {
    let t = curve_of(load(cfg)?)?;
    let g = expand_multiplicities(&t).map_err(Failure::input)?;
    let basis = cycle_basis(&g);
    let b = if basis.is_empty() {
        Vec::new()
    } else {
        period_matrix(&g, &basis).map_err(Failure::input)?.entries
    };
    println!("B_T = {}", show_matrix(&b));
    for (i, c) in basis.iter().enumerate() {
        let terms: Vec<String> = chain_json(&g, c)
            .iter()
            .map(|t| format!("{}e{}.{}", if t.coeff < 0 { "-" } else { "+" }, t.edge, t.copy))
            .collect();
        println!("  cycle {i}: {}", terms.join(" "));
    }
    let out = PeriodsJson {
        g: basis.len(),
        b_t: qmat(&b),
        basis: basis.iter().map(|c| chain_json(&g, c)).collect(),
        alpha_markers: alpha_markers(&basis, &g).into_iter().map(|(e, s)| [e as i64, s]).collect(),
    };
    write_out(cfg, "periods.json", &json(&out))?;
    Ok(OK)
}

// ------------------------------------------------------------ check

#[derive(Serialize)]
struct CheckItem {
    name: String,
    pass: bool,
    detail: String,
}

#[derive(Serialize)]
struct CheckJson {
    pass: bool,
    strict_genericness: bool,
    conditions: Vec<CheckItem>,
}

fn gate(f: &PLPolynomial, cfg: &RunConfig) -> Result<CheckJson, Failure> {
    let gcfg = GoodTropConfig { strict_genericness: cfg.strict_genericness, probe_eps: cfg.eps.last().copied() };
    let r = good_tropicalization_check(f, gcfg).map_err(Failure::input)?;
    Ok(CheckJson {
        pass: r.pass,
        strict_genericness: cfg.strict_genericness,
        conditions: r
            .conditions
            .into_iter()
            .map(|(name, c)| CheckItem { name, pass: c.pass, detail: c.detail })
            .collect(),
    })
}

pub fn check(cfg: &RunConfig) -> Outcome {
    let f = need_poly(load(cfg)?, "check")?;
    let c = gate(&f, cfg)?;
    for it in &c.conditions {
        println!("{} {}: {}", if it.pass { "pass" } else { "FAIL" }, it.name, it.detail);
    }
    println!("good tropicalization: {}", if c.pass { "yes" } else { "no" });
    write_out(cfg, "check.json", &json(&c))?;
    Ok(if c.pass { OK } else { GATE })
}

// ------------------------------------------------------------ verify

#[derive(Serialize)]
struct Conditioning {
    min_separation: f64,
    well_conditioned: bool,
}

#[derive(Serialize)]
struct RecordJson {
    epsilon: f64,
    #[serde(rename = "A")]
    a: Vec<Vec<[f64; 2]>>,
    #[serde(rename = "B_numeric")]
    b_numeric: Vec<Vec<[f64; 2]>>,
    scaled: Vec<Vec<[f64; 2]>>,
    deviation: f64,
    conditioning: Conditioning,
}

#[derive(Serialize)]
struct CylinderJson {
    epsilon: f64,
    frame: [[i64; 2]; 2],
    edge: usize,
    edge_copy: usize,
    cell: String,
    copy: usize,
    summed: bool,
    case: u8,
    measured: [f64; 2],
    predicted: f64,
    deviation: f64,
}

#[derive(Serialize)]
struct ReportJson {
    epsilon: Vec<f64>,
    #[serde(rename = "B_tropical")]
    b_tropical: Vec<Vec<String>>,
    threshold: f64,
    verdict: bool,
    records: Vec<RecordJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lemma44: Option<CylinderStudyJson>,
}

#[derive(Serialize)]
struct CylinderStudyJson {
    groups: usize,
    decreasing: usize,
    rows: Vec<CylinderJson>,
}

fn cell_name(c: Cell) -> String {
    match c {
        Cell::Edge(i) => format!("e{i}"),
        Cell::Ray(i) => format!("r{i}"),
    }
}

fn cylinder_study(f: &PLPolynomial, eps: &[f64]) -> Result<CylinderStudyJson, Failure> {
    let rows = cylinder_table(f, eps).map_err(Failure::input)?;
    let mut groups: std::collections::BTreeMap<_, Vec<&CylinderRecord>> = Default::default();
    for r in &rows {
        groups.entry(r.key()).or_default().push(r);
    }
    let decreasing = groups
        .values()
        .filter(|g| {
            let mut g = g.to_vec();
            g.sort_by(|a, b| b.eps.partial_cmp(&a.eps).unwrap());
            trend_ok(&g.iter().map(|r| r.deviation).collect::<Vec<_>>())
        })
        .count();
    Ok(CylinderStudyJson {
        groups: groups.len(),
        decreasing,
        rows: rows
            .iter()
            .map(|r| CylinderJson {
                epsilon: r.eps,
                frame: r.frame,
                edge: r.edge,
                edge_copy: r.edge_copy,
                cell: cell_name(r.cell),
                copy: r.copy,
                summed: r.summed,
                case: r.case,
                measured: cplx(r.measured),
                predicted: r.predicted,
                deviation: r.deviation,
            })
            .collect(),
    })
}

fn numeric_failure(e: NumError) -> Failure {
    match e {
        NumError::Gate(m) => Failure { code: GATE, msg: format!("good tropicalization fails: {m}") },
        other => Failure { code: VERDICT, msg: other.to_string() },
    }
}

pub fn verify(cfg: &RunConfig) -> Outcome {
    let f = need_poly(load(cfg)?, "verify")?;
    let c = gate(&f, cfg)?;
    if !c.pass {
        let failed: Vec<&str> = c.conditions.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        return Err(Failure { code: GATE, msg: format!("good tropicalization fails: {}", failed.join(", ")) });
    }
    let t = tropicalize(&f).map_err(Failure::input)?;
    let g = expand_multiplicities(&t).map_err(Failure::input)?;
    let basis = cycle_basis(&g);
    if basis.is_empty() {
        return Err(Failure { code: GATE, msg: "genus 0: there is no period matrix to verify".into() });
    }
    let bt = period_matrix(&g, &basis).map_err(Failure::input)?.entries;
    let threshold = cfg.threshold.unwrap_or_else(|| default_threshold(&f, &bt));
    let r = theorem_report(&f, &cfg.eps, threshold).map_err(numeric_failure)?;
    println!("B_T = {}", show_matrix(&r.b_tropical));
    let mut csv = csv::Writer::from_writer(Vec::new());
    csv.write_record(["epsilon", "i", "j", "re", "im", "tropical", "deviation"]).map_err(|e| Failure::input(anyhow!(e)))?;
    for rec in &r.records {
        let entries: Vec<String> =
            rec.scaled.iter().flatten().map(|z| format!("{:.6}{:+.6}i", z.re, z.im)).collect();
        println!("ε = {:<6} (−2πiε)·B′ = [{}]  deviation {:.4e}", rec.eps, entries.join(", "), rec.deviation);
        for (i, row) in rec.scaled.iter().enumerate() {
            for (j, z) in row.iter().enumerate() {
                csv.write_record([
                    rec.eps.to_string(),
                    i.to_string(),
                    j.to_string(),
                    format!("{:.12e}", z.re),
                    format!("{:.12e}", z.im),
                    rat(r.b_tropical[i][j]),
                    format!("{:.6e}", rec.deviation),
                ])
                .map_err(|e| Failure::input(anyhow!(e)))?;
            }
        }
    }
    println!("threshold {:.4}, verdict: {}", r.threshold, if r.verdict { "convergent" } else { "NOT convergent" });
    let l44 = if cfg.lemma44 {
        let l = cylinder_study(&f, &cfg.eps)?;
        println!("cylinder table: {} of {} cylinder groups with decreasing deviation", l.decreasing, l.groups);
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &l.rows {
            w.serialize(CylinderCsv::from(row)).map_err(|e| Failure::input(anyhow!(e)))?;
        }
        write_out(cfg, "lemma44.csv", &String::from_utf8(w.into_inner().map_err(|e| Failure::input(anyhow!(e)))?).unwrap())?;
        Some(l)
    } else {
        None
    };
    let report = ReportJson {
        epsilon: cfg.eps.clone(),
        b_tropical: qmat(&r.b_tropical),
        threshold: r.threshold,
        verdict: r.verdict,
        records: r
            .records
            .iter()
            .map(|rec| RecordJson {
                epsilon: rec.eps,
                a: cmat(&rec.a),
                b_numeric: cmat(&rec.b_numeric),
                scaled: cmat(&rec.scaled),
                deviation: rec.deviation,
                conditioning: Conditioning {
                    min_separation: rec.min_separation,
                    well_conditioned: rec.well_conditioned,
                },
            })
            .collect(),
        lemma44: l44,
    };
    write_out(cfg, "report.json", &json(&report))?;
    let body = String::from_utf8(csv.into_inner().map_err(|e| Failure::input(anyhow!(e)))?).unwrap();
    write_out(cfg, "convergence.csv", &body)?;
    Ok(if r.verdict { OK } else { VERDICT })
}

#[derive(Serialize)]
struct CylinderCsv<'a> {
    epsilon: f64,
    frame: String,
    edge: usize,
    edge_copy: usize,
    cell: &'a str,
    copy: usize,
    summed: bool,
    case: u8,
    re: f64,
    im: f64,
    predicted: f64,
    deviation: f64,
}

impl<'a> From<&'a CylinderJson> for CylinderCsv<'a> {
    fn from(r: &'a CylinderJson) -> Self {
        let f = r.frame;
        Self {
            epsilon: r.epsilon,
            frame: format!("{} {};{} {}", f[0][0], f[0][1], f[1][0], f[1][1]),
            edge: r.edge,
            edge_copy: r.edge_copy,
            cell: &r.cell,
            copy: r.copy,
            summed: r.summed,
            case: r.case,
            re: r.measured[0],
            im: r.measured[1],
            predicted: r.predicted,
            deviation: r.deviation,
        }
    }
}

// ------------------------------------------------------------ lift

#[derive(Serialize)]
struct LiftJson {
    point: [String; 2],
    seed: [[f64; 2]; 2],
    fixed: String,
    x: Vec<(String, [f64; 2])>,
    y: Vec<(String, [f64; 2])>,
    order: String,
    residual_valuation: Option<String>,
    meets_order: bool,
}

fn series_json(s: &PuiseuxSeries) -> Vec<(String, [f64; 2])> {
    s.terms().map(|(e, c)| (rat(*e), cplx(*c))).collect()
}

pub fn lift(cfg: &RunConfig) -> Outcome {
    let f = need_poly(load(cfg)?, "lift")?;
    let points: Vec<QPoint> = match cfg.at {
        Some(p) => vec![p],
        None => tropicalize(&f).map_err(Failure::input)?.vertices.iter().map(|v| v.pos).collect(),
    };
    let mut out = Vec::new();
    let mut all = true;
    for p in points {
        let seed = truncation_root(&f, &p, cfg.phase()).map_err(Failure::input)?;
        let r = lift_point(&f, &p, seed, cfg.order).map_err(Failure::input)?;
        let ok = r.meets(cfg.order);
        all &= ok;
        let res = r.residual_valuation.map_or("exact".to_string(), show_q);
        println!("P = {}  fixed {}  residual valuation {}  ({})", show_pt(p), r.fixed, res, if ok { "ok" } else { "BELOW ORDER" });
        println!("  x = {}", r.x);
        println!("  y = {}", r.y);
        out.push(LiftJson {
            point: [rat(p.x), rat(p.y)],
            seed: [cplx(seed.0), cplx(seed.1)],
            fixed: r.fixed.to_string(),
            x: series_json(&r.x),
            y: series_json(&r.y),
            order: rat(cfg.order),
            residual_valuation: r.residual_valuation.map(rat),
            meets_order: ok,
        });
    }
    write_out(cfg, "lift.json", &json(&out))?;
    Ok(if all { OK } else { VERDICT })
}
