use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qchemflow"))
}

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn run(config: &Path, structure: &Path, output: &Path, seed: Option<u64>) -> Output {
    let mut c = bin();
    c.args(["run", "--config"]).arg(config).arg("--structure").arg(structure).arg("--output").arg(output);
    if let Some(s) = seed {
        c.args(["--seed", &s.to_string()]);
    }
    c.output().unwrap()
}

fn read(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn shipped_example_meets_resolution_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("result.json");
    let o = run(&example("h2_qpe.json"), &example("h2_stretched.xyz"), &out, None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read(&out);
    let casci = doc["summary"]["casci_energy"].as_f64().unwrap();
    let raw = doc["result"]["raw_energy"].as_f64().unwrap();
    assert!((raw - casci).abs() <= 2.0 * std::f64::consts::PI / (0.5 * 256.0), "{raw} vs {casci}");
    assert_eq!(doc["seed"], 42);
    assert_eq!(doc["result"]["histogram"].as_array().unwrap().len(), 8);
    assert_eq!(doc["summary"]["trial_determinants"], 2);
    for kind in ["scf_solver", "active_space_selector", "qubit_mapper", "state_prep", "phase_estimation", "time_evolution_builder"] {
        assert!(doc["stages"][kind]["settings"].is_object(), "{kind}");
    }
}

#[test]
fn reruns_are_identical_apart_from_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        assert!(run(&example("h2_estimate.json"), &example("h2_stretched.xyz"), p, Some(9)).status.success());
    }
    let (mut da, mut db) = (read(&a), read(&b));
    assert!(da["timestamp"].is_u64());
    da.as_object_mut().unwrap().remove("timestamp");
    db.as_object_mut().unwrap().remove("timestamp");
    assert_eq!(serde_json::to_string(&da).unwrap(), serde_json::to_string(&db).unwrap());
    assert_eq!(da["seed"], 9);
    assert_eq!(da["stages"]["estimator"]["settings"]["encoding"], "parity");
}

#[test]
fn structure_json_input() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("h2.json");
    std::fs::write(&s, r#"{"kind":"structure","version":1,"atoms":["H","H"],"coordinates":[[0.0,0.0,0.0],[0.0,0.0,1.4]]}"#).unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"method":"estimate","estimator":{"settings":{"exact":true}}}"#).unwrap();
    let out = dir.path().join("o.json");
    let o = run(&cfg, &s, &out, None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read(&out);
    assert!((doc["energy"].as_f64().unwrap() - doc["summary"]["casci_energy"].as_f64().unwrap()).abs() < 1e-10);
}

#[test]
fn unknown_implementation_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"qubit_mapper":{"impl":"nope"}}"#).unwrap();
    let o = run(&cfg, &example("h2_stretched.xyz"), &dir.path().join("o.json"), None);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("qubit_mapper") && err.contains("bravyi_kitaev"), "{err}");
}

#[test]
fn malformed_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"scf": {}}"#).unwrap();
    let o = run(&cfg, &example("h2_stretched.xyz"), &dir.path().join("o.json"), None);
    assert_eq!(o.status.code(), Some(2));
    let missing = run(&dir.path().join("absent.json"), &example("h2_stretched.xyz"), &dir.path().join("o.json"), None);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn stage_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"charge": 1}"#).unwrap();
    let o = run(&cfg, &example("h2_stretched.xyz"), &dir.path().join("o.json"), None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("scf_solver"));
}

#[test]
fn list_commands() {
    let o = bin().args(["list", "qubit_mapper"]).output().unwrap();
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    let names: Vec<_> = text.lines().collect();
    assert_eq!(names, ["bravyi_kitaev", "jordan_wigner (default)", "parity"]);

    let o = bin().arg("list").output().unwrap();
    let kinds = String::from_utf8_lossy(&o.stdout);
    assert_eq!(kinds.lines().count(), 11);
    assert!(kinds.lines().any(|l| l == "phase_estimation"));

    let o = bin().args(["list", "phase_estimation"]).output().unwrap();
    assert!(String::from_utf8_lossy(&o.stdout).contains("num_bits = 8"));

    let o = bin().args(["list", "nope"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("scf_solver"));
}

#[test]
fn version_command() {
    let o = bin().arg("version").output().unwrap();
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("qchemflow "));
}
