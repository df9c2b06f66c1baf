use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qmi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmi")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

const TWO_DISCS: &str = r#"
[[bodies]]
kind = "disc"
radius = 1.0

[[bodies]]
kind = "disc"
radius = 1.0

[mesh]
refinement = 1

[sweep]
distances = [10.0, 20.0, 40.0]
distance = "center"
"#;

fn three_squares(b_center: &str) -> String {
    format!(
        r#"
[[bodies]]
kind = "rectangle"
width = 1.0
height = 1.0

[[bodies]]
kind = "rectangle"
width = 1.0
height = 1.0
center = {b_center}

[[bodies]]
kind = "rectangle"
width = 1.0
height = 1.0
center = [3.0, 0.0]

[mesh]
refinement = 1

[worldline]
n_loops = 200
n_centers = 4
"#
    )
}

#[test]
fn empty_sweep_is_invalid_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", &TWO_DISCS.replace("[10.0, 20.0, 40.0]", "[]"));
    let out = dir.path().join("out");
    let o = qmi(&["qmi-sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sweep.distances"));
    assert!(!out.exists());
}

#[test]
fn parse_errors_point_at_line_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "seed = 1\n\n[mesh]\nrefinment = 2\n");
    let o = qmi(&["selftest", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 4"), "{err}");
    assert!(err.contains("refinment"), "{err}");
}

#[test]
fn ssa_rejects_two_bodies() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", TWO_DISCS);
    let out = dir.path().join("out");
    let o = qmi(&["ssa", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("exactly 3 bodies"));
    assert!(!out.exists());
}

#[test]
fn missing_config_is_invalid() {
    let o = qmi(&["capacitance"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_is_reproducible_and_reports_fits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", TWO_DISCS);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let oa = qmi(&["qmi-sweep", "--config", &cfg, "--out", a.to_str().unwrap()]);
    assert!(oa.status.success(), "{}", String::from_utf8_lossy(&oa.stderr));
    let ob = qmi(&["qmi-sweep", "--config", &cfg, "--out", b.to_str().unwrap(), "--threads", "1"]);
    assert!(ob.status.success());
    let csv_a = fs::read(a.join("qmi_sweep.csv")).unwrap();
    assert_eq!(csv_a, fs::read(b.join("qmi_sweep.csv")).unwrap());

    let rows = csv_rows(&a.join("qmi_sweep.csv"));
    assert_eq!(rows[0], ["d", "lambda", "value", "error", "route", "mesh_panels", "quad_points"]);
    let integrated: Vec<_> = rows.iter().filter(|r| r[1] == "integrated").collect();
    assert_eq!(integrated.len(), 3);
    for r in &integrated {
        assert_eq!(r[4], "scattering");
        assert_eq!(r[5], "80");
        assert!(r[2].parse::<f64>().unwrap() > 0.0);
    }
    // twelve significant digits
    assert_eq!(integrated[0][0], "1.00000000000e1");

    let doc = json(&a.join("qmi_sweep.json"));
    assert_eq!(doc["passed"], true);
    assert_eq!(doc["metadata"]["subcommand"], "qmi-sweep");
    let slope = doc["fits"]["power_law"]["slope"].as_f64().unwrap();
    assert!((slope + 2.0).abs() < 0.1, "{slope}");
    assert!(doc["fits"]["log_law"]["r_squared"].as_f64().is_some());
}

#[test]
fn disc_capacitance_single_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        "[[bodies]]\nkind = \"disc\"\nradius = 1.0\n\n[mesh]\nrefinement = 3\n\n[capacitance]\nlambdas = [0.0]\n",
    );
    let o = qmi(&["capacitance", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let rows = csv_rows(&dir.path().join("capacitance.csv"));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0], ["lambda", "C_numeric", "C_analytic", "rel_err"]);
    let c: f64 = rows[1][1].parse().unwrap();
    assert!((c / std::f64::consts::FRAC_2_PI - 1.0).abs() < 0.01, "{c}");
    assert!(rows[1][2].parse::<f64>().is_ok());
}

#[test]
fn square_capacitance_has_no_analytic_column_and_decreases() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        "[[bodies]]\nkind = \"rectangle\"\nwidth = 1.0\nheight = 1.0\n\n[mesh]\nrefinement = 2\n",
    );
    let o = qmi(&["capacitance", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let rows = csv_rows(&dir.path().join("capacitance.csv"));
    let c: Vec<f64> = rows[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(rows[1..].iter().all(|r| r[2].is_empty() && r[3].is_empty()));
    assert!(c.windows(2).all(|w| w[1] < w[0]));
    assert_eq!(json(&dir.path().join("capacitance.json"))["monotone_decreasing"], true);
}

#[test]
fn ssa_collinear_squares_pass() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", &three_squares("[1.5, 0.0]"));
    let o = qmi(&["ssa", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let doc = json(&dir.path().join("ssa.json"));
    assert_eq!(doc["passed"], true);
    assert!(doc["worldline"]["counts"]["samples"].as_u64().unwrap() > 0);
    let rows = csv_rows(&dir.path().join("ssa.csv"));
    assert_eq!(rows[0], ["lambda", "delta3_s", "delta_s_ac", "holds"]);
    assert!(rows[1..].iter().all(|r| r[3] == "true"));
}

#[test]
fn ssa_distant_b_gives_vanishing_tripartite() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", &three_squares("[100.0, 0.0]"));
    let o = qmi(&["ssa", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let doc = json(&dir.path().join("ssa.json"));
    let i3 = doc["integrated"]["tripartite"].as_f64().unwrap();
    let iac = doc["integrated"]["qmi_ac"].as_f64().unwrap();
    assert!(i3.abs() < 1e-3 * iac, "{i3} vs {iac}");
}

#[test]
fn tripartite_writes_flat_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", &three_squares("[1.5, 0.0]"));
    let o = qmi(&["tripartite", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let rows = csv_rows(&dir.path().join("tripartite.csv"));
    let last = rows.last().unwrap();
    assert_eq!(last[1], "integrated");
    assert!(last[2].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn worldline_table_and_seed_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        r#"
[[bodies]]
kind = "rectangle"
width = 1.0
height = 1.0

[[bodies]]
kind = "rectangle"
width = 1.0
height = 1.0

[worldline]
distances = [0.5, 1.0]
n_loops = 200
n_centers = 4
"#,
    );
    let run = |sub: &str, seed: &str| {
        let out = dir.path().join(sub);
        let o = qmi(&["worldline", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", seed]);
        assert!(o.status.success());
        fs::read_to_string(out.join("worldline.csv")).unwrap()
    };
    let a = run("a", "3");
    assert_eq!(a, run("b", "3"));
    assert_ne!(a, run("c", "4"));
    assert!(a.starts_with("l,d,estimate,stderr,n_samples\n"));
    assert_eq!(a.lines().filter(|l| l.starts_with("integrated")).count(), 2);
    assert_eq!(json(&dir.path().join("a/worldline.json"))["worldline"]["seed"], 3);
}

#[test]
fn selftest_passes_at_coarse_refinement() {
    let dir = tempfile::tempdir().unwrap();
    let o = qmi(&["selftest", "--refinement", "1", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = json(&dir.path().join("selftest.json"));
    assert_eq!(doc["report"]["checks"].as_array().unwrap().len(), 10);
}
