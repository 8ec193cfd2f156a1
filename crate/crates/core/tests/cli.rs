use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn chancoh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chancoh")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn example(dir: &Path, name: &str, extra: &[&str]) -> String {
    let path = dir.join(format!("{name}.json"));
    let p = path.to_str().unwrap();
    let mut args = vec!["example", name, "--out", p];
    args.extend_from_slice(extra);
    let o = chancoh(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    p.to_string()
}

#[test]
fn measure_prints_ten_significant_digits() {
    let dir = TempDir::new().unwrap();
    let deph = example(dir.path(), "dephasing", &["--dims", "2"]);
    let o = chancoh(&["measure", "--file", &deph, "--measure", "l1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "0.000000000");

    let max = example(dir.path(), "max-coherent", &["--dims", "2x2"]);
    let o = chancoh(&["measure", "--file", &max, "--measure", "ctr"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let value: f64 = stdout(&o).trim().parse().unwrap();
    assert!((value - 1.5).abs() < 1e-4);
    assert_eq!(stdout(&o).trim().replace(['.', '-'], "").len(), 10);
}

#[test]
fn measure_json_and_witness() {
    let dir = TempDir::new().unwrap();
    let phi = example(dir.path(), "phi1", &[]);
    let witness = dir.path().join("witness.json");
    let o =
        chancoh(&["measure", "--file", &phi, "--measure", "ctr-mod", "--json", "--witness", witness.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["measure"], "ctr-mod");
    assert!(v["converged"].as_bool().unwrap());
    assert!(v["value"].as_f64().unwrap() <= 1.0 + 1e-6);
    assert!(v["lambda"].is_number());

    let o = chancoh(&["validate", "--file", witness.to_str().unwrap()]);
    assert!(stdout(&o).contains("incoherent: true"), "{}", stdout(&o));
}

#[test]
fn usage_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let phi = example(dir.path(), "phi1", &[]);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let o = chancoh(&["measure", "--file", bad.to_str().unwrap(), "--measure", "l1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error:"));

    assert_eq!(chancoh(&["measure", "--file", &phi, "--measure", "l3"]).status.code(), Some(2));
    assert_eq!(chancoh(&["suite", "--measure", "l1", "--condition", "C7"]).status.code(), Some(2));
    assert_eq!(chancoh(&["random", "--dims", "2by2"]).status.code(), Some(2));
    assert_eq!(chancoh(&["measure", "--file", "/nonexistent/x.json", "--measure", "l1"]).status.code(), Some(2));
    assert_eq!(chancoh(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn validate_reports_partial_trace_failure() {
    let dir = TempDir::new().unwrap();
    let naive = example(dir.path(), "naive-block", &[]);
    let o = chancoh(&["validate", "--file", &naive]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("partial-trace: FAILED"), "{}", stdout(&o));
    assert!(stdout(&o).contains("valid: false"));
    assert!(stderr(&o).contains("invalid Choi matrix"));

    let mix = example(dir.path(), "phi-mix", &[]);
    let o = chancoh(&["validate", "--file", &mix]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("partial-trace: ok"));
    assert!(stdout(&o).contains("incoherent: false"));

    let o = chancoh(&["validate", "--file", &naive, "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["valid"], false);
    assert!(v["partial_trace_deviation"].as_f64().unwrap() > 0.1);
}

#[test]
fn suite_exit_codes() {
    let o = chancoh(&["suite", "--measure", "l1", "--condition", "C3", "--trials", "20"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["violations"], 0);
    assert!(v.get("expected_violation").is_none());

    let o = chancoh(&["suite", "--measure", "ctr", "--condition", "C3", "--trials", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["expected_violation"], true);
    assert!(v["violations"].as_u64().unwrap() >= 1);

    // a negative threshold turns every trial into a violation
    let o = chancoh(&["suite", "--measure", "rel", "--condition", "B4", "--trials", "5", "--threshold=-1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn counterexample_report() {
    let o = chancoh(&["counterexample", "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["additive_rhs"].as_f64().unwrap() - 19.0 / 12.0).abs() < 1e-4);
    assert_eq!(v["violated"], true);

    let o = chancoh(&["counterexample"]);
    assert!(stdout(&o).contains("violated: true"));
}

#[test]
fn random_channels_round_trip_through_files() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("r.json");
    let p = path.to_str().unwrap();
    assert_eq!(chancoh(&["random", "--dims", "2x3", "--seed", "5", "--out", p]).status.code(), Some(0));
    let first = std::fs::read_to_string(&path).unwrap();
    let o = chancoh(&["random", "--dims", "2x3", "--seed", "5"]);
    assert_eq!(stdout(&o), first);
    let o = chancoh(&["validate", "--file", p]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("valid: true"));

    assert_eq!(chancoh(&["random", "--incoherent", "--dims", "3x2", "--out", p]).status.code(), Some(0));
    let o = chancoh(&["measure", "--file", p, "--measure", "rel"]);
    assert!(stdout(&o).trim().parse::<f64>().unwrap().abs() < 1e-12);
}

#[test]
fn apply_superchannel_file() {
    let dir = TempDir::new().unwrap();
    let phi = example(dir.path(), "phi1", &[]);
    // the superchannel that only relabels outputs: swap |0> and |1> on B
    let sc = dir.path().join("swap.json");
    let one = [1.0, 0.0];
    let zero = [0.0, 0.0];
    let mut rows = vec![vec![zero; 4]; 4];
    for (r, c) in [(1, 0), (0, 1), (3, 2), (2, 3)] {
        rows[r][c] = one;
    }
    let json = serde_json::json!({ "dims_in": [2, 2], "dims_out": [2, 2], "kraus": [rows] });
    std::fs::write(&sc, json.to_string()).unwrap();
    let out = dir.path().join("out.json");
    let o = chancoh(&["apply", "--file", &phi, "--superchannel", sc.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = chancoh(&["measure", "--file", out.to_str().unwrap(), "--measure", "l1"]);
    assert_eq!(stdout(&o).trim(), "3.000000000");

    let o = chancoh(&["apply", "--file", &phi, "--superchannel", sc.to_str().unwrap(), "--selective", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 1);
    assert!((v[0]["probability"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}
