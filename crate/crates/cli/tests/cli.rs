use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const FOUR_NODE: &str = "A -> X\nX -> B\nA -> Y\nB -> Y\nX -> Y\n";

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_causal-local")).current_dir(dir).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn setup() -> TempDir {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("four_node.txt"), FOUR_NODE).unwrap();
    fs::write(dir.path().join("k.json"), r#"{"format":"knowledge/v1","direct":[["A","X"]]}"#).unwrap();
    dir
}

fn relations(v: &Value) -> Vec<(String, String)> {
    v["relations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["node"].as_str().unwrap().to_string(), r["relation"].as_str().unwrap().to_string()))
        .collect()
}

#[test]
fn learn_local_oracle_siblings() {
    let dir = setup();
    let v = json(&run(dir.path(), &["learn-local", "--dag", "four_node.txt", "--oracle", "--target", "A"]));
    assert_eq!(v["target"], "A");
    assert_eq!(v["siblings"], serde_json::json!(["X"]));
    assert_eq!(v["children"], serde_json::json!(["Y"]));
    assert!(v["ci_tests"].as_u64().unwrap() > 0);
}

#[test]
fn identify_with_knowledge_makes_all_definite() {
    let dir = setup();
    let args = ["identify", "--dag", "four_node.txt", "--target", "A", "--knowledge", "k.json", "--compare", "brute-force"];
    let v = json(&run(dir.path(), &args));
    assert_eq!(v["disagreements"], 0);
    for (_, r) in relations(&v) {
        assert!(r.starts_with("definite"), "{r}");
    }
    let zuo = json(&run(
        dir.path(),
        &["identify", "--dag", "four_node.txt", "--target", "A", "--knowledge", "k.json", "--method", "zuo"],
    ));
    assert_eq!(relations(&zuo), relations(&v));
}

#[test]
fn select_predictors_relaxed_is_superset() {
    let dir = setup();
    let strict = json(&run(dir.path(), &["select-predictors", "--dag", "four_node.txt", "--sensitive", "B"]));
    let relaxed =
        json(&run(dir.path(), &["select-predictors", "--dag", "four_node.txt", "--sensitive", "B", "--relaxed"]));
    let s = strict["predictors"].as_array().unwrap();
    let r = relaxed["predictors"].as_array().unwrap();
    assert!(s.iter().all(|p| r.contains(p)));
    assert!(!s.iter().any(|p| p == "Y"));
}

#[test]
fn cpdag_and_mpdag_outputs() {
    let dir = setup();
    let c = json(&run(dir.path(), &["cpdag", "--dag", "four_node.txt"]));
    assert_eq!(c["format"], "pdag/v1");
    assert_eq!(c["undirected"].as_array().unwrap().len(), 2);
    let m = json(&run(dir.path(), &["mpdag", "--dag", "four_node.txt", "--knowledge", "k.json"]));
    assert!(m["undirected"].as_array().unwrap().is_empty());
    let dot = run(dir.path(), &["cpdag", "--dag", "four_node.txt", "--format", "dot"]);
    assert!(String::from_utf8(dot.stdout).unwrap().contains("\"A\" -- \"X\""));
}

#[test]
fn exit_codes() {
    let dir = setup();
    let p = dir.path();
    fs::write(p.join("bad.json"), r#"{"format":"knowledge/v1","direct":[["A","#).unwrap();
    fs::write(p.join("rev.json"), r#"{"format":"knowledge/v1","direct":[["Y","A"]]}"#).unwrap();
    fs::write(p.join("cyc.txt"), "A -> B\nB -> A\n").unwrap();
    let code = |args: &[&str]| run(p, args).status.code().unwrap();

    assert_eq!(code(&["identify", "--dag", "four_node.txt", "--target", "A", "--method", "nope"]), 2);
    assert_eq!(code(&["learn-local", "--target", "A"]), 2);
    assert_eq!(code(&["learn-local", "--dag", "missing.txt", "--target", "A"]), 3);
    assert_eq!(code(&["learn-local", "--dag", "four_node.txt", "--target", "A", "--knowledge", "bad.json"]), 4);
    assert_eq!(code(&["cpdag", "--dag", "cyc.txt"]), 5);
    assert_eq!(code(&["learn-local", "--dag", "four_node.txt", "--target", "Q"]), 5);
    assert_eq!(code(&["mpdag", "--dag", "four_node.txt", "--knowledge", "rev.json"]), 6);
    assert_eq!(code(&["identify", "--dag", "four_node.txt", "--target", "A", "--method", "brute-force", "--mec-cap", "1"]), 7);
}

#[test]
fn simulate_then_learn_from_data() {
    let dir = setup();
    let p = dir.path();
    let out = run(p, &["simulate", "--nodes", "8", "--samples", "1000", "--seed", "5", "--knowledge-fraction", "0.5", "--out", "sim"]);
    assert!(out.status.success());
    for f in ["dag.json", "sem.json", "data.csv", "knowledge.json"] {
        assert!(p.join("sim").join(f).exists(), "{f}");
    }
    let v = json(&run(
        p,
        &["learn-local", "--data", "sim/data.csv", "--alpha", "0.01", "--target", "0", "--knowledge", "sim/knowledge.json"],
    ));
    assert_eq!(v["target"], "0");
}

#[test]
fn bench_is_reproducible() {
    let dir = setup();
    let p = dir.path();
    let args = |out: &'static str| {
        vec!["bench", "--experiment", "chain", "--repetitions", "1", "--fractions", "0.5,1", "--seed", "7", "--out", out]
    };
    assert!(run(p, &args("a.csv")).status.success());
    assert!(run(p, &args("b.csv")).status.success());
    let a = fs::read(p.join("a.csv")).unwrap();
    assert_eq!(a, fs::read(p.join("b.csv")).unwrap());
    let text = String::from_utf8(a).unwrap();
    // Full knowledge leaves nothing to learn around the target.
    let full: Vec<Vec<&str>> = text
        .lines()
        .map(|l| l.split(',').collect::<Vec<_>>())
        .filter(|c| c[4] == "1.0" && c[9] == "mb-by-mb-mpdag")
        .collect();
    assert_eq!(full.len(), 1);
    assert_eq!(full[0][12], "0");
}

#[test]
fn bench_identify_from_config_file() {
    let dir = setup();
    let p = dir.path();
    let cfg = r#"{"experiment":"identify","sizes":[12],"degrees":[2.0],"samples":[500],"fractions":[0.3],
        "repetitions":3,"methods":["labiter","zuo-baseline"],"backend":{"kind":"oracle"},"seed":1,
        "weight_range":[0.6,1.2],"all_edges_knowledge":true,"reuse_shortcuts":true,"mec_cap":4096,
        "scope":"TargetAndSiblings","timing":false}"#;
    fs::write(p.join("cfg.json"), cfg).unwrap();
    let out = run(p, &["bench", "--config", "cfg.json", "--summary", "s.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = String::from_utf8(out.stdout).unwrap();
    assert_eq!(rows.lines().count(), 1 + 3 * 2);
    assert!(fs::read_to_string(p.join("s.csv")).unwrap().contains("labiter"));
}
