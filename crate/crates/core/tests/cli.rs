use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn binary(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dde-stability"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn s(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(bytes)))
}

#[test]
fn check_exit_codes() {
    let dir = TempDir::new().unwrap();
    let wright = write(&dir, "w.json", r#"{"family":"wright","params":{"p":1.4}}"#);
    let out = binary(&["check", "--config", s(&wright)]);
    assert_eq!(code(&out), 0);
    let verdict = json(&out.stdout);
    assert_eq!(verdict["status"], "GloballyStable");
    assert_eq!(verdict["theorem"], "main");

    let edge = write(&dir, "edge.json", r#"{"family":"linear","params":{"p":1.5,"h":1.0}}"#);
    let out = binary(&["check", "--config", s(&edge)]);
    assert_eq!(code(&out), 2);
    assert_eq!(json(&out.stdout)["status"], "Inconclusive");

    let logistic = write(&dir, "l.json", r#"{"family":"logistic","params":{"p":1.0,"h":1.4}}"#);
    let out = binary(&["check", "--config", s(&logistic)]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out.stdout)["theorem"], "apl");

    let missing = binary(&["check", "--config", s(&dir.path().join("absent.json"))]);
    assert_eq!(code(&missing), 1);
    assert!(String::from_utf8_lossy(&missing.stderr).contains("cannot read"));

    let malformed = write(&dir, "bad.json", r#"{"family": "wright", "params": {"p": "#);
    assert_eq!(code(&binary(&["check", "--config", s(&malformed)])), 1);
}

#[test]
fn simulate_logistic_settles() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "l.json",
        r#"{"family":"logistic","params":{"p":1.0,"h":1.5},"history":{"kind":"constant","value":0.5}}"#,
    );
    let csv = dir.path().join("traj.csv");
    let out = binary(&["simulate", "--config", s(&cfg), "--t-end", "400", "--out", s(&csv)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out.stdout);
    assert!(report["tail"]["sup_dev"].as_f64().unwrap() < 1e-3, "{report}");
    assert_eq!(report["converged"], true);
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("t,x\n"));
    assert!(!text.contains("#event"));
}

#[test]
fn simulate_equilibrium_is_constant() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "eq.json",
        r#"{"family":"food_limited","params":{"k":4,"l":2,"h":1.0},"history":{"kind":"constant","value":2.0}}"#,
    );
    let out = binary(&["simulate", "--config", s(&cfg), "--t-end", "20", "--resample", "101"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 101);
    assert!(rows.iter().all(|r| r.ends_with(",2")), "{rows:?}");
    assert!(json(&out.stderr)["tail"]["sup_dev"] == 0.0);
}

#[test]
fn simulate_blowup_reports_event() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "toy.json", r#"{"family":"toy","params":{"c":3.0,"tau":1.0}}"#);
    let csv = dir.path().join("toy.csv");
    let out = binary(&["simulate", "--config", s(&cfg), "--t-end", "200", "--out", s(&csv)]);
    assert_eq!(code(&out), 3);
    assert_eq!(json(&out.stdout)["event"]["kind"], "blowup");
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.lines().any(|l| l.starts_with("#event,blowup,")));
}

#[test]
fn simulate_seed_changes_random_history() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "r.json",
        r#"{"family":"wright","params":{"p":1.0},"history":{"kind":"random","lo":-0.5,"hi":2.0,"seed":1}}"#,
    );
    let run = |seed: &str| binary(&["simulate", "--config", s(&cfg), "--t-end", "5", "--seed", seed]).stdout;
    assert_eq!(run("4"), run("4"));
    assert_ne!(run("4"), run("5"));
}

const WRIGHT_SWEEP: &str = r#"{
    "model_family": "wright",
    "axis1": {"param": "p", "range": [0.5, 1.5], "steps": 11},
    "trials_per_cell": 5,
    "seed": 17,
    "history_range": [-0.9, 3.0]
}"#;

fn sweep_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn wright_sweep_converges_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "sweep.json", WRIGHT_SWEEP);
    let (first, second) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for out in [&first, &second] {
        let run = binary(&["sweep", "--config", s(&spec), "--out", s(out)]);
        assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    }
    let text = fs::read_to_string(&first).unwrap();
    assert_eq!(text, fs::read_to_string(&second).unwrap());
    assert!(text.starts_with("p,trials,converged,events,fraction,verdict,theorem,error\n"));
    let rows = sweep_rows(&text);
    assert_eq!(rows.len(), 11);
    for row in rows {
        assert_eq!(row[4], "1", "{row:?}");
        assert_eq!(row[5], "GloballyStable");
    }
}

#[test]
fn logistic_sweep_converges() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        &dir,
        "sweep.json",
        r#"{
            "model_family": "logistic",
            "base_params": {"h": 1.0},
            "axis1": {"param": "p", "range": [0.5, 1.5], "steps": 5},
            "trials_per_cell": 4,
            "seed": 3
        }"#,
    );
    let out = binary(&["sweep", "--config", s(&spec), "--t-end", "450"]);
    assert_eq!(code(&out), 0);
    for row in sweep_rows(&String::from_utf8(out.stdout).unwrap()) {
        assert_eq!(row[4], "1", "{row:?}");
        assert_eq!(row[6], "apl");
    }
}

#[test]
fn sweep_rejects_invalid_specs() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        &dir,
        "bad.json",
        r#"{"model_family":"wright","axis1":{"param":"p","range":[0.5,1.5],"steps":1},"trials_per_cell":1,"seed":0}"#,
    );
    assert_eq!(code(&binary(&["sweep", "--config", s(&spec)])), 1);
}

#[test]
fn bounds_table_and_footer() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("bounds.csv");
    let out = binary(&["bounds", "--a", "-1.5", "--b", "1", "--x-max", "5", "--n", "21", "--out", s(&csv)]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("x,A,B,D,R,branch,reason\n"));
    let zero = text.lines().find(|l| l.starts_with("0,")).expect("zero row");
    assert!(zero.starts_with("0,0,0,0,0,"), "{zero}");

    let footer = json(&fs::read(dir.path().join("bounds.csv.json")).unwrap());
    let close = |key: &str, want: f64| assert!((footer[key].as_f64().unwrap() - want).abs() < 1e-9, "{key}");
    close("A_prime_0", -1.0);
    close("A_second_0", 8.0 / 3.0);
    close("nu", -0.75);
    close("x2", 0.5);

    let linear = dir.path().join("linear.csv");
    assert_eq!(code(&binary(&["bounds", "--a", "-1", "--b", "0", "--out", s(&linear)])), 0);
    let footer = json(&fs::read(dir.path().join("linear.csv.json")).unwrap());
    assert_eq!(footer["x2_reason"], "no-crossing");
    assert!(footer["x2"].is_null());
}

#[test]
fn every_path_maps_to_a_known_exit_code() {
    let cases: [&[&str]; 7] = [
        &[],
        &["bogus"],
        &["bounds", "--a", "0.2", "--b", "1"],
        &["bounds", "--a", "-1", "--b", "-1"],
        &["bounds", "--a", "-1", "--b", "1", "--n", "1"],
        &["simulate", "--config", "/nonexistent.json"],
        &["--help"],
    ];
    for args in cases {
        let c = code(&binary(args));
        assert!([0, 1, 2, 3].contains(&c), "{args:?} exited with {c}");
    }
    assert_eq!(code(&binary(&["bogus"])), 1);
    assert_eq!(code(&binary(&["--help"])), 0);
}
