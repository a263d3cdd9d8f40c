use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn kres(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kres"))
        .args(args)
        .output()
        .expect("kres runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn models() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn example() -> String {
    models().join("example.tsf.json").to_string_lossy().into_owned()
}

#[test]
fn solve_prints_res_2() {
    let out = kres(&["solve", "--input", &example(), "--k", "2"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("res_k(G)  = {1}"), "{}", stdout(&out));
}

#[test]
fn empty_res_k_is_an_answer() {
    let out = kres(&["solve", &example(), "--k", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("res_k(G)  = {}"));
}

#[test]
fn kmax_prints_two_and_writes_strategy() {
    let dir = tempfile::tempdir().unwrap();
    let strat = dir.path().join("s.json");
    let out = kres(&["kmax", "--input", &example(), "--strategy-out", strat.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "k_max(1) = 2");
    let text = std::fs::read_to_string(&strat).unwrap();
    let s = resilience_core::ResilienceStrategy::from_json(&text, 4).unwrap();
    assert_eq!(s.k, 2);

    let out = kres(&["kmax", &example(), "--state", "3", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["k_max"], 0);
}

#[test]
fn risk_reproduces_reference_rows() {
    let out = kres(&["risk", "--T", "20", "--mtbf", "10", "--repair", "36s", "--k", "1..6"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].contains("59.4%") && lines[1].contains("0.45%"), "{}", lines[1]);
    assert!(lines[2].contains("0.20%") && lines[2].contains("2.0e-16%"), "{}", lines[2]);

    let csv = stdout(&kres(&["risk", "--format", "csv"]));
    assert!(csv.starts_with("k,"), "{csv}");
}

#[test]
fn exit_codes() {
    assert_eq!(kres(&["solve"]).status.code(), Some(2));
    assert_eq!(kres(&["frobnicate"]).status.code(), Some(2));
    let missing = kres(&["kmax", "--input", "/nonexistent.tsf.json"]);
    assert_eq!(missing.status.code(), Some(1));
    let err = String::from_utf8(missing.stderr).unwrap();
    assert!(err.contains("core-model"), "{err}");
    // Simulation needs an explicit seed.
    assert_eq!(kres(&["simulate", &example(), "--k", "1"]).status.code(), Some(2));
}

#[test]
fn simulate_is_deterministic() {
    let args = [
        "simulate", &example(), "--k", "2", "--antagonist", "random", "--plays", "200", "--horizon", "500",
        "--seed", "9",
    ];
    let a = kres(&args);
    let b = kres(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["error_reaches"], 0);
    assert_eq!(v["clean"], true);
}

#[test]
fn simulate_reports_overclaimed_strategy() {
    let dir = tempfile::tempdir().unwrap();
    let strat_path = dir.path().join("s.json");
    let trace_path = dir.path().join("t.json");
    // Claim that {1, 2} is 2-resilient; it is only 1-resilient.
    let out = kres(&["strategy", &example(), "--k", "1", "-o", strat_path.to_str().unwrap()]);
    assert!(out.status.success());
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&strat_path).unwrap()).unwrap();
    v["k"] = 2.into();
    std::fs::write(&strat_path, v.to_string()).unwrap();
    let out = kres(&[
        "simulate",
        &example(),
        "--strategy",
        strat_path.to_str().unwrap(),
        "--start",
        "2",
        "--plays",
        "10",
        "--horizon",
        "100",
        "--seed",
        "1",
        "--trace-out",
        trace_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let trace = std::fs::read_to_string(&trace_path).unwrap();
    let trace = resilience_core::oracle::PlayTrace::from_json(&trace).unwrap();
    assert_eq!(trace.outcome, resilience_core::oracle::Outcome::ErrorReached);
}

#[test]
fn compile_and_solve_avionics() {
    let dir = tempfile::tempdir().unwrap();
    let tsf = dir.path().join("a.tsf.json");
    let dict = dir.path().join("a.dict.json");
    let model = models().join("avionics.cefsm");
    let out = kres(&[
        "compile",
        model.to_str().unwrap(),
        "-o",
        tsf.to_str().unwrap(),
        "--dict",
        dict.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["states"], 83);
    let entries: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&dict).unwrap()).unwrap();
    assert_eq!(entries.as_array().unwrap().len(), 83);

    let out = kres(&["kmax", tsf.to_str().unwrap(), "--mode", "repair", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["k_max"], 1);
}

#[test]
fn gen_chain_one_is_the_shipped_example() {
    let out = kres(&["gen", "--family", "chain", "--len", "1"]);
    assert!(out.status.success());
    let shipped = std::fs::read_to_string(models().join("example.tsf.json")).unwrap();
    assert_eq!(stdout(&out), shipped);

    let out = kres(&["gen", "--family", "voting", "--r", "5", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["expected_k"], 2);
    assert!(v["artifact"].as_str().unwrap().contains("template"));

    assert_eq!(kres(&["gen", "--family", "avionics", "--n", "3"]).status.code(), Some(1));
}

#[test]
fn every_subcommand_speaks_json() {
    let ex = example();
    let dir = tempfile::tempdir().unwrap();
    let model = models().join("avionics.cefsm");
    let tsf = dir.path().join("x.tsf.json");
    let runs: Vec<Vec<&str>> = vec![
        vec!["compile", model.to_str().unwrap(), "-o", tsf.to_str().unwrap(), "--format", "json"],
        vec!["solve", &ex, "--k", "1", "--format", "json"],
        vec!["kmax", &ex, "--format", "json"],
        vec!["strategy", &ex, "--k", "1", "--format", "json"],
        vec!["simulate", &ex, "--k", "1", "--plays", "5", "--horizon", "50", "--seed", "3", "--format", "json"],
        vec!["gen", "--family", "pbft", "--r", "4", "--format", "json"],
        vec!["risk", "--format", "json"],
        vec!["export-dot", &ex, "--highlight-k", "1", "--format", "json"],
    ];
    for args in runs {
        let out = kres(&args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        serde_json::from_slice::<serde_json::Value>(&out.stdout).unwrap_or_else(|e| panic!("{args:?}: {e}"));
    }
}

#[test]
fn export_dot_highlights_resilient_states() {
    let out = kres(&["export-dot", &example(), "--highlight-k", "2"]);
    let dot = stdout(&out);
    assert!(dot.starts_with("digraph"), "{dot}");
    let text = stdout(&kres(&["strategy", &example(), "--k", "2", "--format", "text"]));
    assert!(text.starts_with("res_2 (base) = {1}"), "{text}");
}
