use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_upset-poincare"))
        .args(args)
        .env("UPSET_POINCARE_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn verify_small_dimension_passes() {
    let out = run(&["verify", "--enumerate", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["passed"], true);
    assert_eq!(v["rows"].as_array().unwrap().len(), 19);
}

#[test]
fn verify_described_set() {
    let out = run(&["verify", "--set", "threshold 10 5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["passed"], true);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["mix", "--eps", "1.5"]).status.code(), Some(1));
    assert_eq!(run(&["lemmas", "--draws", "0"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["verify", "--set", "threshold 3"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn infeasible_constant_exits_two_with_witnesses() {
    let out = run(&["lemmas", "--c", "2.0", "--draws", "20000", "--grid", "201"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_eq!(v["passed"], false);
    let failed: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(failed.contains(&"discriminant") && failed.contains(&"five_point"), "{failed:?}");
    assert!(!v["witnesses"].as_array().unwrap().is_empty());
}

#[test]
fn output_is_deterministic() {
    let args = ["lemmas", "--draws", "20000", "--grid", "201", "--instances", "50", "--jensen", "20", "--seed", "7"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);

    let sim = ["simulate", "--set", "threshold 9 5", "--steps", "300", "--chains", "8", "--seed", "3"];
    assert_eq!(run(&sim).stdout, run(&sim).stdout);
}

#[test]
fn mix_single_set_respects_bounds() {
    let out = run(&["mix", "--set", "threshold 3 2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let row = &v["rows"][0];
    assert_eq!(row["t_mix"], 6);
    assert!(row["t_mix"].as_u64() <= row["bound_spectral"].as_u64());
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("spec.json");
    std::fs::write(&cfg, r#"{"command": "enumerate", "enumerate": 3}"#).unwrap();
    let out = run(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["rows"]["count"], 19);

    std::fs::write(&cfg, r#"{"command": "enumerate", "bogus": 1}"#).unwrap();
    assert_eq!(run(&["--config", cfg.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn csv_table_and_svg_plot() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("mix.csv");
    let svg = dir.path().join("mix.svg");
    let out = run(&[
        "mix",
        "--family",
        "majority",
        "--n",
        "3,5",
        "--format",
        "csv",
        "--out",
        csv.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(&csv).unwrap();
    let mut lines = table.lines();
    assert!(lines.next().unwrap().starts_with("n,"));
    assert_eq!(lines.count(), 2);
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<polyline"));
}

#[test]
fn spectral_csv_columns() {
    let out = run(&["spectral", "--enumerate", "2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 6);
}
