//! End-to-end runs of the binary: exit codes, stdout JSON and output files.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ribaucour"))
}

#[test]
fn lyapunov_reference_instance() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(
        &spec,
        r#"{"p": [[1.0, 1.0], [-1.0, 1.0]], "c": [[2.0, 2.0], [4.0, 4.0]]}"#,
    )
    .unwrap();
    let out = bin().arg("lyapunov").arg("--spec").arg(&spec).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let x = v["solution"].as_array().unwrap();
    let expect = [[2.0, 0.5], [1.5, 1.0]];
    for i in 0..2 {
        for j in 0..2 {
            let got = x[i][j].as_f64().unwrap();
            assert!((got - expect[i][j]).abs() < 1e-10);
        }
    }
}

#[test]
fn sylvester_scalar_instance() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(
        &spec,
        r#"{"a": [[0.5]], "c": 0.0, "c_tilde": 0.0, "psi": [0.0], "nu": [[1.0]], "beta": [[1.0]]}"#,
    )
    .unwrap();
    let out = bin().arg("sylvester").arg("--spec").arg(&spec).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["status"], "UniqueInvertible");
    assert!((v["solution"][0][0].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn bad_grid_spec_exits_with_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    // a one-node axis is rejected by the grid validator
    std::fs::write(
        &spec,
        r#"{
            "seed": {"kind": "vacuum", "n": 2},
            "grid": {"lo": [0.0, 0.0], "hi": [1.0, 1.0], "steps": [1, 1]},
            "type": "p", "variant": "flat_lagrangian", "p": [[1.0]],
            "init_phi": [-1.0], "init_gamma": [[1.0], [1.0]]
        }"#,
    )
    .unwrap();
    let out = bin().arg("transform").arg("--spec").arg(&spec).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn missing_spec_is_an_input_error() {
    let out = bin().arg("lyapunov").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn vacuum_demo_writes_manifest_and_vertices() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(
        &spec,
        r#"{"n": 2, "grid": {"half": 0.4, "spacing": 0.02}, "p_values": [1.0, 2.0], "cube": true}"#,
    )
    .unwrap();
    let outdir = dir.path().join("out");
    let out = bin()
        .arg("vacuum-demo")
        .arg("--spec")
        .arg(&spec)
        .arg("--out")
        .arg(&outdir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(outdir.join("cube_manifest.json")).unwrap())
            .unwrap();
    // k = 2 cube: vertices {1}, {2}, {1,2}, plus the seed itself = 4 corners;
    // the manifest lists the three transformed vertices
    assert_eq!(manifest["vertices"].as_array().unwrap().len(), 3);
    assert!(outdir.join("report.json").exists());
    assert!(outdir.join("seed.csv").exists());
    assert!(outdir.join("nondiag.csv").exists());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(outdir.join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["status"], "ok");
}

#[test]
fn transform_writes_obj_for_surfaces() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(
        &spec,
        r#"{
            "seed": {"kind": "vacuum", "n": 2},
            "grid": {"half": 0.3, "spacing": 0.02},
            "type": "p", "variant": "p_star", "p": [[1.0]],
            "init_phi": [-1.0], "init_gamma": [[1.0], [1.0]]
        }"#,
    )
    .unwrap();
    let outdir = dir.path().join("out");
    let out = bin()
        .arg("transform")
        .arg("--spec")
        .arg(&spec)
        .arg("--out")
        .arg(&outdir)
        .arg("--format")
        .arg("obj")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let obj = std::fs::read_to_string(outdir.join("immersion.obj")).unwrap();
    assert!(obj.starts_with("v "));
    assert!(obj.contains("\nf "));
}

#[test]
fn deterministic_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(
        &spec,
        r#"{"n": 2, "grid": {"half": 0.2, "spacing": 0.02}, "p_values": [1.0, 2.0], "cube": false}"#,
    )
    .unwrap();
    let mut outputs = Vec::new();
    for run in 0..2 {
        let outdir = dir.path().join(format!("out{run}"));
        let out = bin()
            .arg("vacuum-demo")
            .arg("--spec")
            .arg(&spec)
            .arg("--out")
            .arg(&outdir)
            .output()
            .unwrap();
        assert!(out.status.success());
        outputs.push(std::fs::read(outdir.join("scalar_p1.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}
