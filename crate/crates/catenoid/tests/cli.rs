//! Black-box tests of the command-line binary: exit codes, JSON shapes,
//! determinism, and the solve -> verify -> mesh round trip.

use std::path::PathBuf;
use std::process::{Command, Output};

use catenoid::fluxmodel::{inverse_stereographic, ExtComplex, FluxData};
use num_complex::Complex64;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_catenoid"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("catenoid-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn tetra_flux_path() -> PathBuf {
    let zeta = Complex64::from_polar(1.0, std::f64::consts::TAU / 3.0);
    let s = std::f64::consts::SQRT_2;
    let points = [
        ExtComplex::Finite(Complex64::new(1.0 / s, 0.0)),
        ExtComplex::Finite(zeta / s),
        ExtComplex::Finite(zeta * zeta / s),
        ExtComplex::Infinity,
    ];
    let vectors: Vec<[f64; 3]> = points.iter().map(|p| inverse_stereographic(*p)).collect();
    let d = FluxData::new(vectors, vec![1.0; 4]).unwrap();
    let path = scratch("tetra-flux.json");
    std::fs::write(&path, serde_json::to_string(&d).unwrap()).unwrap();
    path
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout should be JSON")
}

#[test]
fn classify_reports_type_and_obstructions() {
    let flux = tetra_flux_path();
    let out = bin().arg("classify").arg(&flux).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["type"]["kind"], "TypeIII");
    assert!(v["obstructions"]["hits"].as_array().unwrap().is_empty());
}

#[test]
fn solve_verify_mesh_round_trip() {
    let flux = tetra_flux_path();
    let sol = scratch("tetra-sol.json");
    let out = bin()
        .arg("solve")
        .arg(&flux)
        .arg("-o")
        .arg(&sol)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&sol).unwrap()).unwrap();
    assert_eq!(v["kind"], "candidates");
    let cands = v["candidates"].as_array().unwrap();
    assert_eq!(cands.len(), 1);
    assert_eq!(cands[0]["weierstrass"]["branched"], false);

    let out = bin().arg("verify").arg(&sol).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    for entry in report.as_array().unwrap() {
        assert_eq!(entry["passes"], true);
    }

    let obj = scratch("tetra.obj");
    let out = bin()
        .arg("mesh")
        .arg(&sol)
        .arg("-o")
        .arg(&obj)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&obj).unwrap();
    assert!(text.lines().any(|l| l.starts_with("v ")));
    assert!(text.lines().any(|l| l.starts_with("f ")));
}

#[test]
fn solve_output_is_deterministic() {
    let flux = tetra_flux_path();
    let a = scratch("det-a.json");
    let b = scratch("det-b.json");
    for path in [&a, &b] {
        let out = bin()
            .arg("solve")
            .arg(&flux)
            .arg("-o")
            .arg(path)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn obstructed_input_exits_one_and_names_the_pattern() {
    let d = FluxData::new(
        vec![
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
            [1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
        ],
        vec![1.0, 1.0, 1.0, -1.0],
    )
    .unwrap();
    let path = scratch("obstructed.json");
    std::fs::write(&path, serde_json::to_string(&d).unwrap()).unwrap();
    let out = bin().arg("solve").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("four-end-opposed-plus-pair"),
        "diagnostics should name the pattern: {err}"
    );
}

#[test]
fn square_flux_examples_verify_clean() {
    let sol = scratch("square-flux.json");
    let out = bin()
        .args(["example", "square-flux", "--param", "p=1.2", "-o"])
        .arg(&sol)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&sol).unwrap()).unwrap();
    assert_eq!(v["candidates"].as_array().unwrap().len(), 4);

    let out = bin().arg("verify").arg(&sol).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    for entry in report.as_array().unwrap() {
        assert_eq!(entry["passes"], true);
        assert!(entry["report"]["reduction2_residual"].as_f64().unwrap() < 1e-8);
    }
}

#[test]
fn bad_inputs_exit_two() {
    let out = bin().args(["example", "no-such-surface"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin().args(["example", "square-flux"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "missing parameter");

    let garbage = scratch("garbage.json");
    std::fs::write(&garbage, "{not json").unwrap();
    let out = bin().arg("classify").arg(&garbage).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin().arg("solve").arg("/no/such/file.json").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn family_example_solves_and_meshes() {
    let sol = scratch("parallel4.json");
    let out = bin()
        .args(["example", "parallel4", "--param", "t=0.8", "-o"])
        .arg(&sol)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&sol).unwrap()).unwrap();
    assert_eq!(v["kind"], "family");
    assert!(v["family"]["eqf_residual"].as_f64().unwrap() < 1e-10);

    let obj = scratch("parallel4.obj");
    let out = bin()
        .arg("mesh")
        .arg(&sol)
        .arg("-o")
        .arg(&obj)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}
