use std::fs;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_focal-forge"));
    c.env_remove("FOCAL_FORGE_THREADS");
    c
}

fn text(o: &Output) -> (String, String) {
    (String::from_utf8_lossy(&o.stdout).into_owned(), String::from_utf8_lossy(&o.stderr).into_owned())
}

#[test]
fn lists_scenarios() {
    let out = bin().arg("list-scenarios").output().unwrap();
    assert!(out.status.success());
    let (stdout, _) = text(&out);
    for id in ["circle-r2", "sphere-point-s2", "hopf-fiber-s3", "circle-line-r3"] {
        assert!(stdout.contains(id), "{id} missing from\n{stdout}");
    }
    let out = bin().args(["list-scenarios", "--json"]).output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v.as_array().unwrap().len() >= 7);
}

#[test]
fn bad_tolerance_exits_two_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"scenario": "circle-r2", "tolerances": {"newton": -1}}"#).unwrap();
    let out = bin().args(["index", "--config"]).arg(&cfg).arg("--out-dir").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out).1.contains("tolerances.newton"));

    let out = bin().args(["index", "--scenario", "circle-r2", "--tol-scale", "-2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn operation_mismatch_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"scenario": "circle-r2", "operation": "split"}"#).unwrap();
    let out = bin().args(["taut", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out).1.contains("operation"));
}

#[test]
fn missing_foliation_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["split", "--scenario", "hyperplane-r3", "--out-dir"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out).1.contains("scenario"));
}

#[test]
fn taut_sphere_point_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["taut", "--scenario", "sphere-point-s2", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{:?}", text(&out));
    let report = fs::read_to_string(dir.path().join("taut.json")).unwrap();
    assert!(report.contains("\"perfect\""));
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn split_hopf_from_shipped_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/split-hopf.json");
    let out = bin()
        .args(["split", "--config", cfg, "--seed", "11", "--out-dir"])
        .arg(dir.path())
        .env("FOCAL_FORGE_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{:?}", text(&out));
    let csv = fs::read_to_string(dir.path().join("split.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 50);
    assert!(rows.iter().all(|r| r.ends_with(",true")));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 11);
    assert_eq!(manifest["threads"], 2);
}
