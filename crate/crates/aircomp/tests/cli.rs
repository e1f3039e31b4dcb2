use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn aircomp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aircomp")).args(args).output().unwrap()
}

fn write_instance(dir: &Path, name: &str, json: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn solve_writes_an_equalized_policy() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), "i.json", r#"{"h":[0.4,1.3,0.9,2.1],"groups":[[1,2],[3,4]],"P":10.0,"sigma2":1.0}"#);
    let out = dir.path().join("policy.json");
    let run = aircomp(&["solve", "--instance", &inst, "--out", out.to_str().unwrap()]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let policy: serde_json::Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    let b = policy["b"].as_array().unwrap();
    assert_eq!(b.len(), 4);
    assert!(b.iter().all(|v| (0.0..=10f64.sqrt() + 1e-12).contains(&v.as_f64().unwrap())));
}

#[test]
fn infeasible_instance_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    // B_2² ≤ 4 cannot reach ΔD·A ≥ 100
    let inst = write_instance(dir.path(), "i.json", r#"{"h":[1.0,1.0,1.0],"groups":[[1],[2,3]],"P":1.0,"sigma2":100.0}"#);
    assert_eq!(aircomp(&["solve", "--instance", &inst]).status.code(), Some(2));
}

#[test]
fn zero_based_groups_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), "i.json", r#"{"h":[1.0,1.0],"groups":[[0],[1]],"P":1.0,"sigma2":1.0}"#);
    assert_eq!(aircomp(&["solve", "--instance", &inst]).status.code(), Some(1));
}

#[test]
fn sweeps_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let args = ["feas-sweep", "--d1", "5", "--d2", "3", "--snr-db", "-5,10", "--trials", "200", "--seed", "3", "--out"];
        let mut args: Vec<&str> = args.to_vec();
        args.push(out.to_str().unwrap());
        assert!(aircomp(&args).status.success());
        fs::read_to_string(out).unwrap()
    };
    let first = run("a.csv");
    assert_eq!(first, run("b.csv"));
    assert!(first.starts_with("# aircomp-robust v1\n"));
    assert_eq!(first.lines().count(), 4);
}
