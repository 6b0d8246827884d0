//! Convergence study over an ε grid for the two worked examples: horn
//! residues of `ω_f`, cylinder integrals of `ω_E`, and `(−2πiε)·B′_ε`.
//!
//! `cargo run --release --example study -- [eps,eps,...] > data/convergence.csv`

use tropint::numverify::report::{cylinder_table, leaf_pair, residue_table, theorem_report};
use tropint::plpoly::parse;
use tropint::tropcurve::{tropicalize, Cell};

const EXAMPLES: [(&str, &str); 2] = [
    ("I", "(x+e)*y^2+(x+e^2)*(x+e^3)*y+e^8"),
    ("II", "y^3+(x+e^4)*y^2+e^2*(x+e)*(x+2*e)*y+e^10"),
];

fn cell(c: Cell) -> String {
    match c {
        Cell::Edge(i) => format!("e{i}"),
        Cell::Ray(i) => format!("r{i}"),
    }
}

fn main() {
    let eps: Vec<f64> = std::env::args()
        .nth(1)
        .map(|s| s.split(',').map(|x| x.parse().expect("ε list")).collect())
        .unwrap_or_else(|| vec![0.2, 0.1, 0.05]);
    println!("example,quantity,eps,re,im,predicted,deviation");
    for (name, src) in EXAMPLES {
        let f = parse(src).unwrap();
        let t = tropicalize(&f).unwrap();
        let ray = leaf_pair(&t).expect("leaf pair");
        for x in residue_table(&f, ray, &eps).unwrap() {
            println!(
                "{name},residue r{}.{},{},{:.12e},{:.12e},{},{:.3e}",
                x.ray, x.copy, x.eps, x.value.re, x.value.im, x.predicted, x.deviation
            );
        }
        for x in cylinder_table(&f, &eps).unwrap() {
            let th = x.frame;
            let what = if x.summed { format!("{}x{}", cell(x.cell), x.copy) } else { format!("{}.{}", cell(x.cell), x.copy) };
            println!(
                "{name},cylinder [{} {};{} {}] E{}.{} {} case{},{},{:.12e},{:.12e},{:.12},{:.3e}",
                th[0][0], th[0][1], th[1][0], th[1][1], x.edge, x.edge_copy, what, x.case, x.eps,
                x.measured.re, x.measured.im, x.predicted, x.deviation
            );
        }
        let r = theorem_report(&f, &eps, f64::INFINITY).unwrap();
        for x in &r.records {
            println!(
                "{name},theorem,{},{:.12e},{:.12e},{},{:.6e}",
                x.eps, x.scaled[0][0].re, x.scaled[0][0].im, r.b_tropical[0][0], x.deviation
            );
        }
    }
}
