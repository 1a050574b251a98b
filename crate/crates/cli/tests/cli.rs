use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn cmdp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmdp")).args(args).output().unwrap()
}

fn fx(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn table(out: &Output) -> Vec<(String, String)> {
    stdout(out)
        .lines()
        .skip(1)
        .filter(|l| !l.starts_with("iterations"))
        .map(|l| {
            let mut it = l.split_whitespace();
            (it.next().unwrap().to_string(), it.next().unwrap().to_string())
        })
        .collect()
}

fn pairs(items: &[(&str, &str)]) -> Vec<(String, String)> {
    items.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

#[test]
fn validate_exit_codes() {
    assert_eq!(cmdp(&["validate", &fx("detour.json")]).status.code(), Some(0));

    let out = cmdp(&["validate", &fx("zero_cycle.json")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("q -> w -> q"), "{}", stderr(&out));

    let out = cmdp(&["validate", &fx("malformed.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));

    assert_eq!(cmdp(&["validate", "/nonexistent/model.json"]).status.code(), Some(2));
}

#[test]
fn detour_safety_table() {
    let out = cmdp(&["solve", &fx("detour.json"), "--objective", "safety"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(table(&out), pairs(&[("s", "2"), ("t", "0"), ("r", "0"), ("u", "5"), ("v", "4")]));
}

#[test]
fn reload_chain_safety_table() {
    let out = cmdp(&["solve", &fx("reload_chain.json"), "--objective", "safety"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(table(&out), pairs(&[("t", "3"), ("u", "0"), ("v", "inf"), ("w", "inf"), ("x", "inf"), ("y", "inf")]));
}

#[test]
fn posreach_strategy_switches_at_ten() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("strategy.json");
    let out = cmdp(&[
        "solve",
        &fx("detour.json"),
        "--objective",
        "posreach",
        "--targets",
        "t",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let rule = doc["states"]["s"].as_array().unwrap();
    let play =
        |level: u64| rule.iter().rfind(|e| e[0].as_u64().unwrap() <= level).map(|e| e[1].as_str().unwrap().to_string());
    // below the value the rule is never consulted
    for level in 2..10 {
        assert_eq!(play(level).as_deref(), Some("a"), "level {level}");
    }
    for level in 10..=20 {
        assert_eq!(play(level).as_deref(), Some("b"), "level {level}");
    }
}

#[test]
fn json_output_uses_null_for_infinity() {
    let out = cmdp(&["solve", &fx("reload_chain.json"), "--objective", "safety", "--json"]);
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["values"]["t"], 3);
    assert!(doc["values"]["y"].is_null());
}

#[test]
fn product_path_matches_direct() {
    let run = |extra: &[&str]| {
        let mut args = vec!["solve", "--objective", "asreach", "--json"];
        let model = fx("goal_leaning.json");
        args.push(&model);
        args.extend_from_slice(extra);
        let doc: Value = serde_json::from_str(&stdout(&cmdp(&args))).unwrap();
        doc["values"].clone()
    };
    assert_eq!(run(&[]), run(&["--via-product"]));
}

#[test]
fn solve_errors() {
    let out = cmdp(&["solve", &fx("detour.json"), "--objective", "posreach", "--targets", "nope"]);
    assert_eq!(out.status.code(), Some(1));
    let out =
        cmdp(&["solve", &fx("threshold.json"), "--objective", "asreach", "--heuristic", "threshold", "--theta", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = cmdp(&["solve", &fx("threshold.json"), "--objective", "asreach", "--theta", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = cmdp(&["solve", &fx("reload_chain.json"), "--objective", "buchi"]);
    assert_eq!(out.status.code(), Some(2));
}

fn simulate(args: &[&str]) -> Value {
    let mut full = vec!["simulate"];
    full.extend_from_slice(args);
    let out = cmdp(&full);
    assert!(out.status.success(), "{}", stderr(&out));
    serde_json::from_str(&stdout(&out)).unwrap()
}

#[test]
fn sigma_a_takes_two_steps() {
    let report =
        simulate(&[&fx("goal_leaning.json"), &fx("sigma_a.json"), "--from", "s", "--load", "2", "--episodes", "1000"]);
    assert_eq!(report["mean"], 2.0);
    assert_eq!(report["hit_count"], 1000);
}

#[test]
fn threshold_strategy_ert() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("theta.json");
    let strategy = path.to_str().unwrap();
    let out = cmdp(&[
        "solve",
        &fx("threshold.json"),
        "--objective",
        "asreach",
        "--heuristic",
        "threshold",
        "--theta",
        "0.2",
        "--out",
        strategy,
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report = simulate(&[&fx("threshold.json"), strategy, "--from", "s", "--load", "1", "--seed", "7"]);
    let mean = report["mean"].as_f64().unwrap();
    assert!((mean - 3.8).abs() <= 0.05 * 3.8, "mean {mean}");
}

#[test]
fn all_censored_reports_max_steps_plus() {
    let report = simulate(&[
        &fx("goal_leaning.json"),
        &fx("sigma_a.json"),
        "--from",
        "s",
        "--load",
        "2",
        "--targets",
        "v",
        "--max-steps",
        "50",
        "--episodes",
        "10",
    ]);
    assert!(report["mean"].is_null());
    assert_eq!(report["mean_display"], "50+");
    assert_eq!(report["censored_count"], 10);
}

#[test]
fn simulate_is_deterministic_and_writes_traces() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("trace.csv");
    let args = [
        fx("threshold.json"),
        fx("sigma_a.json"),
        "--from".into(),
        "s".into(),
        "--load".into(),
        "2".into(),
        "--episodes".into(),
        "20".into(),
        "--seed".into(),
        "3".into(),
        "--csv".into(),
        csv.to_string_lossy().into_owned(),
    ];
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let first = simulate(&args);
    let trace = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(first, simulate(&args));
    assert_eq!(trace, std::fs::read_to_string(&csv).unwrap());
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("episode,step,state,action,level"));
    assert_eq!(lines.next(), Some("0,0,s,a,2"));
}

#[test]
fn simulate_errors() {
    let out = cmdp(&["simulate", &fx("goal_leaning.json"), &fx("sigma_a.json"), "--from", "s", "--load", "9"]);
    assert_eq!(out.status.code(), Some(1));
    let out = cmdp(&["simulate", &fx("goal_leaning.json"), &fx("sigma_a.json"), "--from", "z", "--load", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let out = cmdp(&["simulate", &fx("goal_leaning.json"), &fx("malformed.json"), "--from", "s", "--load", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gridworld_models() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.json");
    let out = cmdp(&[
        "gridworld",
        "--size",
        "10",
        "--capacity",
        "20",
        "--reloads",
        "0,0;5,5",
        "--targets",
        "9,9",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["states"].as_array().unwrap().len(), 100);
    let mut costs: Vec<u64> = doc["states"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|s| s["actions"].as_array().unwrap().iter().map(|a| a["cons"].as_u64().unwrap()))
        .collect();
    costs.sort();
    costs.dedup();
    assert_eq!(costs, [1, 2]);
    assert_eq!(cmdp(&["validate", path.to_str().unwrap()]).status.code(), Some(0));

    assert_eq!(cmdp(&["gridworld", "--size", "1", "--capacity", "3"]).status.code(), Some(1));
    assert_eq!(cmdp(&["gridworld", "--size", "3", "--capacity", "3", "--reloads", "5,5"]).status.code(), Some(1));
    assert_eq!(cmdp(&["gridworld", "--size", "3", "--capacity", "3", "--reloads", "5"]).status.code(), Some(2));
}

#[test]
fn scaling_csv_rows() {
    let out = cmdp(&["scaling", "--sizes", "5", "--factors", "1,2", "--repeats", "1", "--csv"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("objective,n,capacity,solver,mean_seconds"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("buchi,5,5,native,"));
    assert!(rows[3].starts_with("buchi,5,10,oracle,"));
}
