use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chanent::cli::RunReport;
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_chanent");

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("spawn chanent")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_report(path: &Path) -> RunReport {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn compute_rc_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = run(&["compute", "--measure", "rc", "--channel", s(&data("cnot.json")), "--starts", "8", "--seed", "1", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("rc = ") && stdout.contains("lower"), "{stdout}");
    let report = read_report(&out);
    assert_eq!(report.seed, 1);
    assert_eq!(report.digest.len(), 64);
    let r = &report.results[0];
    assert_eq!(r["bound"], "lower");
    assert!((r["value"].as_f64().unwrap() - 1.0).abs() < 1e-3);
    for key in ["measure", "witness", "telemetry", "notes"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    let text = serde_json::to_string(&report).unwrap();
    assert_eq!(serde_json::from_str::<RunReport>(&text).unwrap(), report);
}

#[test]
fn tiny_values_get_a_raw_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = run(&["compute", "--measure", "rc", "--channel", s(&data("swap.json")), "--starts", "4", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let r = &read_report(&out).results[0];
    let v = r["value"].as_f64().unwrap();
    assert!(v == 0.0 || v.abs() >= 1e-12);
    if let Some(raw) = r.get("value_raw") {
        assert!(v == 0.0 && raw.as_f64().unwrap().abs() < 1e-12);
    }
}

#[test]
fn strength_of_cyclic_shift() {
    let o = run(&["compute", "--measure", "strength", "--channel", s(&data("cyclic_shift3.json")), "--starts", "8"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("K = 4"));
}

#[test]
fn digest_tracks_file_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let ch = dir.path().join("c.json");
    let digest = |text: &str| {
        std::fs::write(&ch, text).unwrap();
        let out = dir.path().join("r.json");
        let o = run(&["oracle", "--kind", "grid-rc", "--channel", s(&ch), "--steps", "8", "--out", s(&out)]);
        assert_eq!(o.status.code(), Some(0));
        read_report(&out).digest
    };
    let a = digest(r#"{"name": "cnot"}"#);
    let b = digest(r#"{"name": "cnot"}"#);
    let c = digest(r#"{"name":  "cnot"}"#);
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn incompatible_arguments_exit_3() {
    let cnot = data("cnot.json");
    let o = run(&["compute", "--measure", "rc", "--channel", s(&cnot), "--channel2", "missing.json"]);
    assert_eq!(o.status.code(), Some(3));
    let o = run(&["compute", "--measure", "sc", "--channel", s(&cnot)]);
    assert_eq!(o.status.code(), Some(3));
    let o = run(&["compute", "--measure", "rc", "--channel", s(&data("amplitude_damping.json"))]);
    assert_eq!(o.status.code(), Some(3));
    let o = run(&["compute", "--measure", "rkme", "--channel", s(&data("ghz_entangler3.json"))]);
    assert_eq!(o.status.code(), Some(3));
    let o = run(&["compute", "--measure", "rkme", "--channel", s(&data("ghz_entangler3.json")), "--k", "5"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn malformed_input_exits_2_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"in_dims": [2], "out_dims": [2], "kraus": [[[[1, 0], [0, 0]], [[0, 0], [1]]]]}"#).unwrap();
    let o = run(&["compute", "--measure", "rc", "--channel", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("kraus[0][1][1]"));

    std::fs::write(&bad, r#"{"in_dims": [2], "kraus": []}"#).unwrap();
    let o = run(&["compute", "--measure", "rc", "--channel", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("out_dims"));

    std::fs::write(&bad, "not json").unwrap();
    assert_eq!(run(&["compute", "--measure", "rc", "--channel", s(&bad)]).status.code(), Some(2));
    assert_eq!(run(&["compute", "--measure", "nope", "--channel", s(&bad)]).status.code(), Some(2));
    assert_eq!(run(&["oracle", "--kind", "grid-rc", "--channel", s(&data("cnot.json")), "--steps", "4096"]).status.code(), Some(2));
}

#[test]
fn oracle_commands() {
    let o = run(&["oracle", "--kind", "grid-rc", "--channel", s(&data("cnot.json")), "--steps", "32"]);
    assert_eq!(o.status.code(), Some(0));
    let line = String::from_utf8_lossy(&o.stdout).to_string();
    let v: f64 = line.split('=').nth(1).unwrap().split_whitespace().next().unwrap().parse().unwrap();
    assert!(v >= 0.999);

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.json");
    let o = run(&["oracle", "--kind", "partition", "--state", s(&data("ghz3_state.json")), "--k", "2", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let r: &Value = &read_report(&out).results[0];
    assert_eq!(r["nonseparable_everywhere"], true);

    let o = run(&["oracle", "--kind", "free-floor", "--channel", s(&data("cnot.json")), "--samples", "20"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn check_passes_and_detects_injected_fault() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let o = run(&["check", "--suite", "rc", "--trials", "3", "--seed", "3", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(read_report(&out).results.iter().all(|p| p["pass"] == true));

    let o = run(&["check", "--suite", "rc", "--trials", "3", "--seed", "3", "--inject-fault", "sign-flip-concurrence", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL rc_nonnegativity"));
    assert!(out.exists());
}
