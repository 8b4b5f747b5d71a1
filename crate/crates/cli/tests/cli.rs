use std::path::Path;
use std::process::{Command, Output};

fn nlsinflate(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlsinflate"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn small_nls() -> Vec<&'static str> {
    vec!["solve-nls", "--set", "points=256", "--set", "t_final=0.1", "--set", "field_dt=0.05"]
}

#[test]
fn unknown_experiment_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = nlsinflate(&["bogus"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn supercritical_regularity_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = nlsinflate(&["inflation", "--set", "s=2.0"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("s_c"));
}

#[test]
fn unknown_key_and_bad_grid_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(nlsinflate(&["solve-nls", "--set", "nonsense=1"], dir.path()).status.code(), Some(3));
    assert_eq!(nlsinflate(&["solve-nls", "--set", "points=100"], dir.path()).status.code(), Some(3));
    assert_eq!(nlsinflate(&["solve-nls", "--set", "no_equals_sign"], dir.path()).status.code(), Some(3));
}

#[test]
fn small_run_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = nlsinflate(&small_nls(), dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["report.csv", "summary.json", "manifest.json"] {
        assert!(dir.path().join(name).is_file(), "{name} missing");
    }
    let fields: Vec<_> = std::fs::read_dir(dir.path().join("fields")).unwrap().collect();
    assert_eq!(fields.len(), 3);

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "pass");
    assert_eq!(manifest["config"]["points"], 256);
    assert_eq!(manifest["config"]["t_final"], 0.1);

    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(csv.starts_with("t,mass,energy,mass_drift,energy_drift\n"));
    assert_eq!(csv.lines().count(), 12);
}

#[test]
fn manifest_replay_reproduces_the_report() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    assert_eq!(nlsinflate(&small_nls(), first.path()).status.code(), Some(0));
    let manifest = first.path().join("manifest.json");
    let out = nlsinflate(&["solve-nls", "--config", manifest.to_str().unwrap()], second.path());
    assert_eq!(out.status.code(), Some(0));
    let a = std::fs::read(first.path().join("report.csv")).unwrap();
    let b = std::fs::read(second.path().join("report.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn toml_file_and_overrides_merge() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "experiment = \"solve-nls\"\npoints = 128\nt_final = 0.05\nsigma = 1\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = nlsinflate(&["solve-nls", "--config", cfg.to_str().unwrap(), "--set", "sigma=2"], &out_dir);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["points"], 128);
    assert_eq!(manifest["config"]["sigma"], 2);

    let wrong = nlsinflate(&["solve-limit", "--config", cfg.to_str().unwrap()], &dir.path().join("x"));
    assert_eq!(wrong.status.code(), Some(3));
}
