use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_schro1d"));
    c.env("SCHRO1D_THREADS", "2");
    c
}

fn suites() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../suites")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

const WELL_SCENARIO: &str = r#"{
    "id": "well",
    "potential": {"family": "square_well", "depth": 2, "width": 3},
    "energy": 1,
    "init": {"x0": 0, "u0": 0, "du0": 1},
    "span": [-1, 4],
    "max_step": 0.01
}"#;

#[test]
fn verify_default_suite() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let outcomes = dir.path().join("outcomes.json");
    let cfg = suites().join("default.json");
    let o = run(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--outcomes",
        outcomes.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(report["summary"]["expected_fail"], 1);
    let flat: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(outcomes).unwrap()).unwrap();
    assert!(flat.as_array().unwrap().len() > 10);
}

#[test]
fn empty_suite_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "empty.json", r#"{"scenarios": []}"#);
    assert_eq!(run(&["verify", "--config", &p]).status.code(), Some(0));
}

#[test]
fn unexpected_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let suite = r#"{"scenarios": [{
        "id": "sin-decay-wrong",
        "potential": {"breakpoints": [0, 1], "values": [0]},
        "energy": 1,
        "init": {"x0": 0, "u0": 0, "du0": 1},
        "span": [0, 20],
        "max_step": 0.01,
        "checks": [{"check": "decay", "tail_fraction": 0.2}]
    }]}"#;
    let p = write(dir.path(), "s.json", suite);
    assert_eq!(run(&["verify", "--config", &p]).status.code(), Some(1));
}

#[test]
fn config_errors_exit_two_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = WELL_SCENARIO.replace(r#""max_step": 0.01"#, r#""max_step": -1"#);
    let p = write(dir.path(), "bad.json", &format!(r#"{{"scenarios": [{bad}]}}"#));
    let o = run(&["verify", "--config", &p]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("well") && err.contains("max_step"), "{err}");

    let p = write(dir.path(), "junk.json", "{not json");
    assert_eq!(run(&["verify", "--config", &p]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--config", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--families", "nope"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn degenerate_constants_need_floor() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "free.json", r#"{"breakpoints": [0, 1], "values": [0]}"#);
    let o = run(&["c1", "--config", &p, "--energy", "0"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["c1", "--config", &p, "--energy", "0", "--c2-floor", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["constants"]["c2_floor"], 1.0);
    assert_eq!(doc["constants"]["c_bound"], 3.0);
}

#[test]
fn c1_of_square_well() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "well.json",
        r#"{"family": "square_well", "depth": 2, "width": 3}"#,
    );
    let o = run(&["c1", "--config", &p, "--energy", "2,1"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["c1"], 2.0);
}

#[test]
fn solve_and_prufer_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(dir.path(), "well.json", WELL_SCENARIO);
    let trace = dir.path().join("trace.csv");
    let o = run(&[
        "solve",
        "--config",
        &sc,
        "--max-step",
        "0.1",
        "--out",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&trace).unwrap();
    assert!(text.starts_with("x,re_u,im_u,re_du,im_du\n"));
    assert_eq!(text.lines().count(), 52);

    let o = run(&["prufer", "--config", &sc]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("x,R,theta\n"));
}

#[test]
fn simon_stolz_free_curve() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "free.json", r#"{"breakpoints": [0, 1], "values": [0]}"#);
    let o = run(&[
        "simon-stolz",
        "--config",
        &p,
        "--energy",
        "1",
        "--x-max",
        "10",
        "--max-step",
        "0.01",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("x,norm_T,integrand,cumulative\n"));
    let last: Vec<f64> = text
        .lines()
        .last()
        .unwrap()
        .split(',')
        .map(|s| s.parse().unwrap())
        .collect();
    assert!((last[3] - 10.0).abs() < 1e-6);
    let o = run(&["simon-stolz", "--config", &p, "--energy", "1,0.5", "--x-max", "10"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_is_deterministic() {
    let a = run(&["sweep", "--seed", "1", "--n", "6"]);
    let b = run(&["sweep", "--seed", "1", "--n", "6"]);
    assert_eq!(a.status.code(), Some(0));
    let strip = |o: &Output| {
        let mut v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        v["wall_time_s"] = 0.into();
        v
    };
    assert_eq!(strip(&a), strip(&b));
}
