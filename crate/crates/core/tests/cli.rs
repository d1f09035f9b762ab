//! End-to-end runs of the `uew` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

use uew::io::{load_operator, save_state};
use uew::optimize::grid_oracle_sup;
use uew::states::{DensityMatrix, Example31Config, NoisyStateFamily};
use uew::witness::{ConstraintSpec, HalfSpaceSide};

fn uew(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uew"))
        .args(args)
        .env_remove("UEW_SEED")
        .output()
        .expect("spawn uew")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> Value {
    assert_eq!(o.status.code(), Some(0), "stderr: {}", stderr(o));
    serde_json::from_slice(&o.stdout).expect("json report")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Writes the example operators (and states) into a fresh directory.
fn example_dir(povm: &str) -> (TempDir, PathBuf, PathBuf) {
    let dir = TempDir::new().unwrap();
    let o = uew(&["--povm", povm, "example31", "--out", s(dir.path())]);
    json(&o);
    let t = dir.path().join("test.json");
    let c = dir.path().join("constraint.json");
    (dir, t, c)
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const IDENTITY: &str = r#"{"dims":[2,2],"matrix":[
  [[1,0],[0,0],[0,0],[0,0]],[[0,0],[1,0],[0,0],[0,0]],
  [[0,0],[0,0],[1,0],[0,0]],[[0,0],[0,0],[0,0],[1,0]]]}"#;

#[test]
fn gs_of_identity_and_example() {
    let dir = TempDir::new().unwrap();
    let id = write(dir.path(), "id.json", IDENTITY);
    let v = json(&uew(&["gs", "--test", s(&id), "--restarts", "8"]));
    assert!((v["results"]["g_s"].as_f64().unwrap() - 1.0).abs() <= 1e-12);
    assert_eq!(v["command"], "gs");
    assert_eq!(v["config"]["restarts"], 8);

    let (_d, t, _) = example_dir("complete");
    let v = json(&uew(&["gs", "--test", s(&t)]));
    assert!((v["results"]["g_s"].as_f64().unwrap() - 4.0 / 9.0).abs() <= 1e-6);
}

#[test]
fn malformed_input_exits_one() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.json", "{\"dims\":[2,2],\"matrix\":[");
    let o = uew(&["gs", "--test", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("uew: "));

    let o = uew(&["gs", "--test", s(&dir.path().join("missing.json"))]);
    assert_eq!(o.status.code(), Some(1));

    let o = uew(&["gs"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn pc_on_both_sides_and_infeasible() {
    let (_d, t, c) = example_dir("complete");
    let v = json(&uew(&["pc", "--test", s(&t), "--constraint", s(&c), "--cvalue", "1/100", "--side", "geq"]));
    assert!((v["results"]["p_c_tilde"].as_f64().unwrap() - 4.0 / 9.0).abs() <= 1e-6);
    assert_eq!(v["results"]["side"], "geq");

    let v = json(&uew(&["pc", "--test", s(&t), "--constraint", s(&c), "--cvalue", "1/100", "--side", "leq"]));
    let p_c = v["results"]["p_c"].as_f64().unwrap();
    assert_eq!(v["results"]["boundary_active"], true);
    let spec = ConstraintSpec::new(load_operator(&c).unwrap(), 0.01).unwrap();
    let oracle = grid_oracle_sup(&load_operator(&t).unwrap(), Some((&spec, HalfSpaceSide::Leq)), 721).unwrap();
    assert!(oracle <= p_c + 1e-12 && p_c - oracle <= 1e-4, "cli {p_c} oracle {oracle}");

    // P1⊗P1 is positive semidefinite, so nothing lies below zero.
    let o = uew(&["pc", "--test", s(&t), "--constraint", s(&c), "--cvalue", "-1/10", "--side", "leq"]);
    assert_eq!(o.status.code(), Some(3), "stderr: {}", stderr(&o));
}

#[test]
fn scan_rows_and_bad_alpha() {
    let o = uew(&["scan", "--example31", "--alphas", "0,-1,-inf", "--decimals", "3"]);
    assert_eq!(o.status.code(), Some(0), "stderr: {}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "alpha,bound,threshold_p");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("0,") && lines[1].ends_with(",none"), "{}", lines[1]);
    assert!(lines[2].starts_with("-1,") && lines[2].ends_with(",0.004"), "{}", lines[2]);
    assert!(lines[3].starts_with("-inf,") && lines[3].ends_with(",0.010"), "{}", lines[3]);

    assert_eq!(uew(&["scan", "--example31", "--alphas", "2"]).status.code(), Some(1));
    assert_eq!(uew(&["scan", "--example31", "--alphas", "0,x"]).status.code(), Some(1));
    assert_eq!(uew(&["scan"]).status.code(), Some(1));
}

#[test]
fn detect_verdicts() {
    let (d, t, c) = example_dir("complete");
    let pure = d.path().join("state.json");
    let mixed = d.path().join("mixed.json");
    let args = |state: &Path, alpha: &str| {
        uew(&[
            "detect", "--state", s(state), "--test", s(&t), "--constraint", s(&c), "--cvalue", "1/100",
            "--alpha", alpha, "--restarts", "16",
        ])
    };
    let v = json(&args(&pure, "-1"));
    assert_eq!(v["results"]["verdict"], "Entangled");
    assert!(v["results"]["witness_value"].as_f64().unwrap() < 0.0);
    let v = json(&args(&mixed, "-1"));
    assert_eq!(v["results"]["verdict"], "NotDetected");
    let v = json(&args(&pure, "-inf"));
    assert_eq!(v["results"]["verdict"], "Entangled");
    assert_eq!(v["results"]["alpha"], "-inf");

    let bad = write(
        d.path(),
        "neg.json",
        r#"{"kind":"density","dims":[2,2],"matrix":[
          [[1.5,0],[0,0],[0,0],[0,0]],[[0,0],[-0.5,0],[0,0],[0,0]],
          [[0,0],[0,0],[0,0],[0,0]],[[0,0],[0,0],[0,0],[0,0]]]}"#,
    );
    assert_eq!(args(&bad, "-1").status.code(), Some(1));
}

#[test]
fn alpha0_cases() {
    let (_d, t, c) = example_dir("complete");
    let v = json(&uew(&["alpha0", "--test", s(&t), "--constraint", s(&c), "--cvalue", "1/100"]));
    assert_eq!(v["results"]["case"], "CaseI");
    assert_eq!(v["results"]["alpha0"], "NoFiniteAlpha0");

    // Swapped roles on the printed measurement give a finite rotation bound.
    let (_d2, t2, c2) = example_dir("printed");
    let v = json(&uew(&["alpha0", "--test", s(&c2), "--constraint", s(&t2), "--cvalue", "1/5"]));
    assert_eq!(v["results"]["case"], "CaseII");
    let a0: f64 = v["results"]["alpha0"].as_str().unwrap().parse().unwrap();
    assert!((a0 + 0.377972).abs() <= 1e-4, "alpha0 {a0}");

    let o = uew(&["alpha0", "--test", s(&t), "--constraint", s(&t), "--cvalue", "1/100"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn plane_listing() {
    let (_d, t, c) = example_dir("complete");
    let dir = TempDir::new().unwrap();
    save_state(&dir.path().join("mixed.json"), &DensityMatrix::maximally_mixed((2, 2)).unwrap()).unwrap();
    let o = uew(&["plane", "--states", s(dir.path()), "--test", s(&t), "--constraint", s(&c)]);
    assert_eq!(o.status.code(), Some(0), "stderr: {}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "label,x,y");
    let row: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(row[0], "mixed");
    // Tr(P⊗P)/4 with Tr P = 2/3 under the complete measurement.
    for v in &row[1..] {
        assert!((v.parse::<f64>().unwrap() - 1.0 / 9.0).abs() <= 1e-15, "{v}");
    }

    let empty = TempDir::new().unwrap();
    let o = uew(&["plane", "--states", s(empty.path()), "--test", s(&t), "--constraint", s(&c)]);
    assert_eq!(stdout(&o), "label,x,y\n");

    let fam = NoisyStateFamily::example31(&Example31Config::default()).unwrap();
    save_state(&dir.path().join("a_pure.json"), &fam.member(0.0).unwrap()).unwrap();
    write(dir.path(), "broken.json", "not json");
    write(dir.path(), "zz_trace.json", r#"{"kind":"density","dims":[1,2],"matrix":[[[2,0],[0,0]],[[0,0],[0,0]]]}"#);
    let o = uew(&["plane", "--states", s(dir.path()), "--test", s(&t), "--constraint", s(&c)]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("broken.json") && err.contains("zz_trace.json"), "{err}");
    assert!(!err.contains("a_pure.json") && !err.contains("mixed.json"), "{err}");
}

#[test]
fn seed_flag_overrides_environment() {
    let dir = TempDir::new().unwrap();
    let id = write(dir.path(), "id.json", IDENTITY);
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_uew"));
        cmd.env_remove("UEW_SEED");
        if let Some(e) = env {
            cmd.env("UEW_SEED", e);
        }
        cmd.args(["gs", "--test", s(&id), "--restarts", "4"]);
        if let Some(f) = flag {
            cmd.args(["--seed", f]);
        }
        json(&cmd.output().unwrap())["config"]["seed"].as_u64().unwrap()
    };
    assert_eq!(run(None, None), 0);
    assert_eq!(run(Some("11"), None), 11);
    assert_eq!(run(Some("11"), Some("3")), 3);
}
