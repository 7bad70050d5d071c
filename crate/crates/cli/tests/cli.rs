use std::process::{Command, Output};

use quantum_work::workdist::{weights_number, WeightMethod};

fn qwork(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qwork"))
        .args(args)
        .output()
        .expect("qwork runs")
}

fn records(out: &Output) -> Vec<csv::StringRecord> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(out.stdout.as_slice())
        .records()
        .map(|r| r.unwrap())
        .collect()
}

#[test]
fn weights_reproduce_library_values_exactly() {
    let out = qwork(&["weights", "--n", "3", "--z-max", "12"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert!(text.starts_with("# qwork "));
    assert!(text.lines().nth(1).unwrap() == "n,s,z,q");
    let rows = records(&out);
    assert_eq!(rows.len(), 7 * 121);
    let s_values: Vec<i64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!((s_values[0], *s_values.last().unwrap()), (-3, 3));
    for r in rows.iter().step_by(37) {
        let (s, z, q): (i64, f64, f64) = (r[1].parse().unwrap(), r[2].parse().unwrap(), r[3].parse().unwrap());
        let expected = weights_number(3, z, s..=s, WeightMethod::Auto).unwrap()[0].1;
        assert_eq!(q, expected);
    }
}

#[test]
fn verify_default_scenario_passes() {
    let out = qwork(&["verify"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = records(&out);
    assert_eq!(rows.len(), 4);
    for r in &rows {
        let err: f64 = r[2].parse().unwrap();
        assert!(err < 1e-6, "{r:?}");
        assert_eq!(&r[5], "true");
    }
}

#[test]
fn empty_mode_list_is_a_config_error() {
    let out = qwork(&["cf", "--set", "modes=[]"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("modes"));
}

#[test]
fn schema_violations_report_the_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let mut doc: serde_json::Value = serde_json::from_str(include_str!("../scenarios/default.json")).unwrap();
    doc["evaluation"]["nu_grid"]["points"] = serde_json::json!("many");
    std::fs::write(&path, doc.to_string()).unwrap();
    let out = qwork(&["cf", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("evaluation.nu_grid.points"));
    let out = qwork(&["cf", "--config", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_with_three() {
    // The Jarzynski check needs the source switched off.
    let out = qwork(&["jarzynski", "--set", "evaluation.t=1.0"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("jarzynski"));
}

#[test]
fn output_is_deterministic_and_hashed() {
    let a = qwork(&["dist"]);
    let b = qwork(&["dist"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = qwork(&["dist", "--set", "evaluation.t=5.5"]);
    let first_line = |o: &Output| String::from_utf8_lossy(&o.stdout).lines().next().unwrap().to_string();
    assert_ne!(first_line(&a), first_line(&c));
}

#[test]
fn json_lines_match_csv() {
    let csv_out = qwork(&["cf"]);
    let json_out = qwork(&["cf", "--format", "jsonl"]);
    assert!(json_out.status.success());
    let text = String::from_utf8(json_out.stdout).unwrap();
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines[0]["command"], "cf");
    let rows = records(&csv_out);
    assert_eq!(rows.len() + 1, lines.len());
    for (r, j) in rows.iter().zip(&lines[1..]) {
        assert_eq!(r[2].parse::<f64>().unwrap(), j["re"].as_f64().unwrap());
        assert_eq!(r[3].parse::<f64>().unwrap(), j["im"].as_f64().unwrap());
    }
}

#[test]
fn output_file_and_casimir_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("casimir.csv");
    let out = qwork(&["casimir", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(&path).unwrap();
    let exact = -std::f64::consts::PI.powi(2) / 720.0;
    for rec in r.records() {
        let c: f64 = rec.unwrap()[2].parse().unwrap();
        assert!((c - exact).abs() < 5e-3 * exact.abs());
    }
}

#[test]
fn remaining_subcommands_succeed() {
    for cmd in ["drive", "moments", "jarzynski"] {
        let out = qwork(&[cmd]);
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(records(&out).len() > 1);
    }
}
