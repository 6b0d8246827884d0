use std::path::Path;
use std::process::{Command, Output};

const EX1: &str = "(x+e)*y^2+(x+e^2)*(x+e^3)*y+e^8";
const EX2: &str = "y^3+(x+e^4)*y^2+e^2*(x+e)*(x+2*e)*y+e^10";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tropint")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(dir: &Path, name: &str) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

#[test]
fn trop_example_one() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["trop", "--poly", EX1, "--out", d.path().to_str().unwrap(), "--svg"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let c = json(d.path(), "curve.json");
    assert_eq!(c["vertices"].as_array().unwrap().len(), 4);
    assert_eq!(c["edges"].as_array().unwrap().len(), 4);
    assert_eq!(c["rays"].as_array().unwrap().len(), 4);
    assert_eq!(c["graph_genus"], 1);
    assert_eq!(c["expanded_genus"], 1);
    let svg = std::fs::read_to_string(d.path().join("curve.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn trop_example_two_has_a_doubled_edge() {
    let o = run(&["trop", "--poly", EX2]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("graph genus: 0"), "{s}");
    assert!(s.contains("expanded genus: 1"), "{s}");
    assert!(s.contains("mult 2"), "{s}");
}

#[test]
fn svg_needs_an_output_directory() {
    let o = run(&["trop", "--poly", EX1, "--svg"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_input_reports_the_column() {
    let o = run(&["trop", "--poly", "(x+"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("column"), "{}", stderr(&o));
}

#[test]
fn period_matrices_of_the_examples() {
    assert!(stdout(&run(&["periods", "--poly", EX1])).contains("B_T = [2]"));
    assert!(stdout(&run(&["periods", "--poly", EX2])).contains("B_T = [6]"));
    let o = run(&["periods", "--poly", "x+y+1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("0×0 (genus 0)"));
}

#[test]
fn periods_from_a_saved_curve_match() {
    for poly in [EX1, EX2] {
        let d = tempfile::tempdir().unwrap();
        let dir = d.path().to_str().unwrap();
        let a = d.path().join("a");
        let b = d.path().join("b");
        assert_eq!(run(&["trop", "--poly", poly, "--out", dir]).status.code(), Some(0));
        let curve = d.path().join("curve.json");
        run(&["periods", "--poly", poly, "--out", a.to_str().unwrap()]);
        run(&["periods", "--input", curve.to_str().unwrap(), "--out", b.to_str().unwrap()]);
        let pa = std::fs::read(a.join("periods.json")).unwrap();
        let pb = std::fs::read(b.join("periods.json")).unwrap();
        assert_eq!(pa, pb, "{poly}");
    }
}

#[test]
fn check_passes_on_both_examples() {
    for poly in [EX1, EX2] {
        let o = run(&["check", "--poly", poly]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        assert!(!stdout(&o).contains("FAIL"));
    }
}

#[test]
fn check_names_the_failing_conditions() {
    let o = run(&["check", "--poly", "y^2 + x*y + (x+e)*(x+e)"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("FAIL genericness"), "{}", stdout(&o));
    let o = run(&["check", "--poly", "x*y+x+y+1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("FAIL regularity"), "{}", stdout(&o));
}

#[test]
fn strict_genericness_rejects_example_one() {
    let o = run(&["check", "--poly", EX1, "--strict-genericness"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("FAIL genericness"));
}

#[test]
fn verify_example_one_converges() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--poly", EX1, "--out", d.path().to_str().unwrap(), "--lemma44"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let r = json(d.path(), "report.json");
    assert_eq!(r["verdict"], true);
    assert_eq!(r["records"].as_array().unwrap().len(), 3);
    assert!(r["lemma44"]["groups"].as_u64().unwrap() > 0);
    let csv = std::fs::read_to_string(d.path().join("convergence.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(d.path().join("lemma44.csv").exists());
}

#[test]
fn verify_refuses_bad_input() {
    let o = run(&["verify", "--poly", "y^2 + x*y + (x+e)*(x+e)"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("genericness"));
}

#[test]
fn verify_rejects_an_unsorted_grid() {
    let o = run(&["verify", "--poly", EX1, "--eps", "0.1,0.2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn lift_at_vertices() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["lift", "--poly", EX1, "--order", "8", "--out", d.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).matches("(ok)").count(), 4);
    assert!(d.path().join("lift.json").exists());
}

#[test]
fn lift_to_order_zero_keeps_the_seed() {
    let o = run(&["lift", "--poly", EX1, "--order", "0", "--at", "2,3"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let y = s.lines().find(|l| l.trim_start().starts_with("y =")).unwrap();
    assert!(!y.contains(" + "), "{y}");
}

#[test]
fn lift_off_the_curve() {
    let o = run(&["lift", "--poly", EX1, "--at", "0,5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Θ(P) singleton"));
}

#[test]
fn outputs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let dir = d.path().to_str().unwrap();
        run(&["trop", "--poly", EX2, "--out", dir, "--svg"]);
        run(&["periods", "--poly", EX2, "--out", dir]);
        run(&["lift", "--poly", EX1, "--seed", "3", "--out", dir]);
    }
    for f in ["curve.json", "curve.svg", "periods.json", "lift.json"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_file_supplies_defaults() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.json");
    std::fs::write(&cfg, format!(r#"{{"poly": "{EX1}", "order": "2"}}"#)).unwrap();
    let o = run(&["lift", "--config", cfg.to_str().unwrap(), "--at", "2,3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn bad_thread_count_is_an_input_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_tropint"))
        .args(["periods", "--poly", EX1])
        .env("TROPINT_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
