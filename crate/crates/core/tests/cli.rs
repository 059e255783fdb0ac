//! Exit codes and report shapes of the `optri` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn optri(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_optri"))
        .current_dir(corpus())
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    optri(args).status.code().expect("exit code")
}

fn listrev_triple(prog: &str) -> Vec<String> {
    [
        "--program",
        "listrev/listrev.opa",
        "--universe",
        "listrev/listrev.opu",
        "triple",
        "listrev/pre.ops",
        prog,
        "listrev/post.ops",
    ]
    .map(String::from)
    .to_vec()
}

fn strs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

#[test]
fn verdicts_map_to_exit_codes() {
    assert_eq!(code(&strs(&listrev_triple("listrev/prog.ops"))), 0);
    assert_eq!(code(&strs(&listrev_triple("listrev/prog_no_last_link.ops"))), 1);

    let t = TempDir::new().unwrap();
    let w = |name: &str, text: &str| {
        let p = t.path().join(name);
        fs::write(&p, text).unwrap();
        p.display().to_string()
    };
    let u = w("u.opu", r#"{"x": {"type": "int", "lo": 0, "hi": 1}}"#);
    let skip = w("skip.ops", "skip");
    let spin = w("spin.ops", "while x < 2 do skip elihw");
    assert_eq!(code(&["--universe", &u, "triple", &skip, &spin, &skip]), 2);
    assert_eq!(code(&["--universe", &u, "equiv", &skip, &skip]), 0);
}

#[test]
fn usage_errors_exit_3() {
    assert_eq!(code(&["no-such-command"]), 3);
    assert_eq!(
        code(&["triple", "listrev/pre.ops", "listrev/prog.ops", "listrev/post.ops"]),
        3
    );
    assert_eq!(code(&["prove", "missing.opp"]), 3);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn proofs_map_to_exit_codes() {
    assert_eq!(code(&["prove", "listrev/listrev.opp"]), 0);
    assert_eq!(code(&["prove", "listrev/listrev_no_last_link.opp"]), 1);
}

#[test]
fn corrupted_premise_fails_the_proof() {
    let t = TempDir::new().unwrap();
    for e in fs::read_dir(corpus().join("listrev")).unwrap() {
        let p = e.unwrap().path();
        fs::copy(&p, t.path().join(p.file_name().unwrap())).unwrap();
    }
    let mut v: Value = serde_json::from_str(&fs::read_to_string(t.path().join("listrev.opp")).unwrap()).unwrap();
    let steps = v["steps"].as_array_mut().unwrap();
    let i = steps.iter().position(|s| s["id"] == "whole-loop").unwrap();
    // Cite the loop triple where the initialisation triple belongs.
    steps[i]["premises"][0] = "loop".into();
    let p = t.path().join("corrupt.opp");
    fs::write(&p, serde_json::to_string_pretty(&v).unwrap()).unwrap();

    let out = optri(&["--json", "prove", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["status"], "FAILED");
    assert_eq!(r["failedStep"], "whole-loop");
}

#[test]
fn json_reports_carry_counterexamples() {
    let mut args = vec!["--json".to_string()];
    args.extend(listrev_triple("listrev/prog_no_last_link.ops"));
    let out = optri(&strs(&args));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["verdict"], "INVALID");
    assert_eq!(r["counterexample"]["replayed"], true);
    assert!(r["universeHash"].as_str().is_some_and(|h| !h.is_empty()));
}

#[test]
fn corpus_command_passes() {
    let out = optri(&["corpus", "."]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}
