//! End-to-end checks of the `clh2d` binary: generation, re-validation on
//! load, artifact determinism, and cross-command consistency.

mod common;

use serde_json::Value;
use std::path::Path;
use std::process::Command;

fn clh2d(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_clh2d"))
        .args(args)
        .env_remove("CLH2D_CACHE")
        .output()
        .expect("binary runs");
    let stdout = String::from_utf8_lossy(&out.stdout).into_owned();
    (out.status.code().unwrap_or(-1), stdout)
}

fn read_value(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn generated_instances_validate_and_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("torus.json");
    let (code, _) = clh2d(&["gen", "toric", "--size", "2x2", "--closed", "--out", inst.to_str().unwrap()]);
    assert_eq!(code, 0);

    let (code, out) = clh2d(&["validate", "--in", inst.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["report"]["valid"], Value::Bool(true));

    let report = dir.path().join("analysis.json");
    let (code, _) = clh2d(&["analyze", "--in", inst.to_str().unwrap(), "--out", report.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v = read_value(&report);
    let r = &v["report"];
    assert_eq!(r["n_qubits"], Value::from(8));
    assert_eq!(r["closed"], Value::Bool(true));
    assert!(r["max_commutation_residual"].as_f64().unwrap() < 1e-12);
    let e = r["exact_ground_energy"].as_f64().unwrap();
    assert!((e + 8.0).abs() < 1e-9, "ground energy {e}");
    assert_eq!(r["classical_edges"].as_array().unwrap().len(), 0);
}

#[test]
fn tampered_instances_are_rejected_on_load() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("torus.json");
    clh2d(&["gen", "toric", "--size", "2x2", "--closed", "--out", inst.to_str().unwrap()]);

    let mut v = read_value(&inst);
    v["instance"]["terms"][0]["matrix"]["data"][3] = serde_json::json!([0.7, 0.0]);
    let bad = dir.path().join("tampered.json");
    std::fs::write(&bad, serde_json::to_string(&v).unwrap()).unwrap();

    let (code, out) = clh2d(&["validate", "--in", bad.to_str().unwrap()]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("commute") || out.contains("Hermitian"), "{out}");

    // Every consumer re-validates on load, not just `validate`.
    let (code, out) = clh2d(&["analyze", "--in", bad.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(out.contains("commute") || out.contains("Hermitian"), "{out}");
}

#[test]
fn prepare_and_certify_agree_on_the_energy() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("defected.json");
    let (code, _) = clh2d(&["gen", "defected", "--size", "2x2", "--closed", "--seed", "3", "--out", inst.to_str().unwrap()]);
    assert_eq!(code, 0);

    let prep = dir.path().join("prepared.json");
    let (code, _) = clh2d(&["prepare", "--in", inst.to_str().unwrap(), "--seed", "7", "--out", prep.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v = read_value(&prep);
    let final_energy = v["report"]["final_energy"].as_f64().unwrap();
    let checks = v["report"]["checks"].as_array().unwrap();
    assert!(checks.iter().all(|c| c["passed"] == Value::Bool(true)), "{checks:?}");

    let cert = dir.path().join("certified.json");
    let (code, _) = clh2d(&["certify", "--in", inst.to_str().unwrap(), "--out", cert.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v = read_value(&cert);
    assert_eq!(v["accepted"], Value::Bool(true));
    let claimed = v["results"][0]["certificate"]["claimed_energy"]
        .as_f64()
        .unwrap();
    assert!(
        (final_energy - claimed).abs() <= 1e-6,
        "prepare {final_energy} vs certify {claimed}"
    );
}

#[test]
fn prepare_artifacts_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("holed.json");
    clh2d(&["gen", "holed", "--size", "2x3", "--seed", "4", "--out", inst.to_str().unwrap()]);

    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let (code, _) = clh2d(&["prepare", "--in", inst.to_str().unwrap(), "--seed", "3", "--out", out.to_str().unwrap()]);
        assert_eq!(code, 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn holed_instances_get_punctured_and_corrected() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("holed.json");
    clh2d(&["gen", "holed", "--size", "2x3", "--seed", "4", "--out", inst.to_str().unwrap()]);

    let (code, out) = clh2d(&["puncture", "--in", inst.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["report"]["removed_terms"].as_u64().unwrap() >= 1);

    let prep = dir.path().join("prepared.json");
    let (code, _) = clh2d(&["prepare", "--in", inst.to_str().unwrap(), "--seed", "3", "--out", prep.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v = read_value(&prep);
    let corrections = v["report"]["corrections"].as_array().unwrap();
    assert!(!corrections.is_empty(), "expected string corrections to fire");
}

#[test]
fn partitions_verify_on_triangulated_grids() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("grid.json");
    let tri = dir.path().join("tri.json");
    let (code, _) = clh2d(&[
        "gen", "triangulated", "--blocks", "1x2", "--radius", "2",
        "--out", inst.to_str().unwrap(), "--tri", tri.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);

    let (code, out) = clh2d(&["partition", "--in", inst.to_str().unwrap(), "--tri", tri.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    let v: Value = serde_json::from_str(&out).unwrap();
    let r = &v["report"];
    assert_eq!(r["quasi_euclidean"]["ok"], Value::Bool(true));
    assert_eq!(r["two_local"], Value::Bool(true));
    assert_eq!(r["covered"], Value::Bool(true));
    assert!(r["blocks"].as_u64().unwrap() >= 4);
}

#[test]
fn usage_errors_exit_with_code_two() {
    let (code, _) = clh2d(&[]);
    assert_eq!(code, 2);
    let (code, _) = clh2d(&["prepare", "missing.json"]); // no --seed
    assert_eq!(code, 2);
}

#[test]
fn missing_files_exit_with_code_one() {
    let (code, out) = clh2d(&["analyze", "--in", "/nonexistent/instance.json"]);
    assert_eq!(code, 1);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["failure"].is_object(), "{out}");
}

#[test]
fn the_exact_energy_cache_is_shared_between_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let inst = dir.path().join("torus.json");
    clh2d(&["gen", "toric", "--size", "2x2", "--closed", "--out", inst.to_str().unwrap()]);

    let run = |out: &Path| {
        let s = Command::new(env!("CARGO_BIN_EXE_clh2d"))
            .args(["analyze", "--in", inst.to_str().unwrap(), "--out", out.to_str().unwrap()])
            .env("CLH2D_CACHE", &cache)
            .output()
            .unwrap();
        assert!(s.status.success());
    };
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    run(&a);
    assert!(cache.read_dir().unwrap().count() >= 1, "cache populated");
    run(&b);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn scrambled_instances_pass_the_equivalence_check() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("scrambled.json");
    let (code, _) = clh2d(&["gen", "scrambled", "--size", "2x2", "--closed", "--seed", "5", "--out", inst.to_str().unwrap()]);
    assert_eq!(code, 0);
    let (code, out) = clh2d(&["equivalence", "--in", inst.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["report"]["toric_form"], Value::Bool(true));
}

#[test]
fn hand_written_instances_reduce_through_the_cli() {
    // A library-built instance with three injected classical qubits, saved
    // as a bare (non-enveloped) file: the loader accepts both shapes.
    let dir = tempfile::tempdir().unwrap();
    let (inst, expected) = common::classical_family(2, 11);
    let path = dir.path().join("classical.json");
    std::fs::write(&path, serde_json::to_string(&inst).unwrap()).unwrap();

    let (code, out) = clh2d(&["reduce", "--in", path.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    let v: Value = serde_json::from_str(&out).unwrap();
    let removed = v["report"]["removed_qubits"].as_array().unwrap();
    assert_eq!(removed.len(), expected);
}
