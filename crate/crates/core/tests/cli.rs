mod common;

use std::fs;
use std::path::Path;

use common::{assert_schema, run, stderr_json, stdout_json, violations};
use serde_json::json;

fn ok(args: &[&str], dir: &Path) -> serde_json::Value {
    let out = run(args, dir);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    stdout_json(&out)
}

#[test]
fn exact_identities_are_exactly_zero() {
    let dir = tempfile::tempdir().unwrap();
    let v = ok(&["identities", "--mode", "exact"], dir.path());
    assert_schema(&v, "identities");
    assert_eq!(v["mode"], "exact");
    for c in v["checks"].as_array().unwrap() {
        assert_eq!(c["residual"], 0.0, "{c}");
    }
    let v = ok(&["identities", "--mode", "double"], dir.path());
    assert_eq!(v["all_pass"], true);
}

#[test]
fn fibration_and_deformation_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let v = ok(&["fibration"], dir.path());
    assert_schema(&v, "fibration");
    assert_eq!(v["diagnosis"], "product");

    fs::write(dir.path().join("twisted.json"), r#"{"alpha": [["1/2", "0", "0", "0"], ["0", "0", "0", "0"], ["0", "0", "0", "0"]]}"#).unwrap();
    let v = ok(&["fibration", "--spec", "twisted.json", "--mode", "exact"], dir.path());
    assert_schema(&v, "fibration");
    assert_eq!((v["diagnosis"].as_str(), v["orthonormality_residual"].as_f64()), (Some("non-product"), Some(0.0)));

    fs::write(dir.path().join("xi.json"), r#"{"epsilon": [1, 0, 0, 0]}"#).unwrap();
    let v = ok(&["deform", "--xi", "xi.json"], dir.path());
    assert_schema(&v, "deform");
    assert_eq!(v["has_type_iv"], true);

    let form = json!({"dim": 7, "degree": 4, "terms": [{"idx": [1, 2, 3, 4], "c": "3/2"}]});
    fs::write(dir.path().join("xi1.json"), form.to_string()).unwrap();
    let v = ok(&["deform", "--xi", "xi1.json", "--mode", "exact"], dir.path());
    assert_schema(&v, "deform");
    assert_eq!((v["c_I"].clone(), v["has_type_iv"].clone()), (json!("3/2"), json!(false)));
}

#[test]
fn lattice_commands_chain_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let flow = ok(&["flow", "--lattice", "4x4x4x4", "--seed", "3", "--out", "f.lat"], dir.path());
    assert_schema(&flow, "flow");
    assert_eq!(flow["status"], "converged");
    let csv = fs::read_to_string(dir.path().join("f.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("step,asd_fraction,charge"));
    assert_eq!(csv.lines().count(), flow["steps"].as_u64().unwrap() as usize + 2);
    assert!(dir.path().join("f.lat.json").exists());

    let lift = ok(&["lift", "--in", "f.lat", "--tgrid", "2x2x2", "--out", "f7.lat"], dir.path());
    assert_schema(&lift, "lift");
    let residual = ok(&["residual", "--in", "f7.lat"], dir.path());
    assert_schema(&residual, "residual");
    assert_eq!(lift["residual"], residual["residual"]);

    let cs = ok(&["cs", "--field", "f7.lat", "--probe-offsets", "3"], dir.path());
    assert_schema(&cs, "cs");
    assert_eq!(cs["probes"].as_array().unwrap().len(), 3);

    fs::write(dir.path().join("xi.json"), r#"{"epsilon": [0, 1, 0, 0]}"#).unwrap();
    let v = ok(&["obstruct", "--field", "f7.lat", "--xi", "xi.json"], dir.path());
    assert_schema(&v, "obstruct");
    assert_eq!(v["verdict"], "instanton-obstructed");
}

#[test]
fn flat_bundle_survives() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["flow", "--lattice", "4x4x4x4", "--flux", "0,0,0,0,0,0", "--noise", "0", "--out", "flat.lat"];
    assert_eq!(ok(&args, dir.path())["status"], "converged");
    ok(&["lift", "--in", "flat.lat", "--tgrid", "2x2x2", "--out", "flat7.lat"], dir.path());
    fs::write(dir.path().join("xi.json"), r#"{"epsilon": [1, -1, 0.5, 2]}"#).unwrap();
    let v = ok(&["obstruct", "--field", "flat7.lat", "--xi", "xi.json"], dir.path());
    assert_eq!(v["verdict"], "instanton-survives");
    assert_eq!(v["q"], 0.0);
}

#[test]
fn errors_carry_exit_codes_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let expect = |args: &[&str], code: i32, kind: &str| {
        let out = run(args, dir.path());
        assert_eq!(out.status.code(), Some(code), "{args:?}");
        let err = stderr_json(&out);
        assert_schema(&err, "error");
        assert_eq!((err["error"]["kind"].as_str(), err["error"]["exit_code"].as_i64()), (Some(kind), Some(code as i64)));
        assert!(out.stdout.is_empty());
    };
    expect(&["residual", "--in", "missing.lat"], 1, "invalid-input");
    expect(&["obstruct", "--field", "missing.lat", "--xi", "missing.json"], 1, "invalid-input");
    expect(&["flow", "--out", "x.lat", "--tol", "-1"], 1, "invalid-input");
    expect(&["flow", "--out", "x.lat", "--lattice", "4x4x4"], 1, "invalid-input");
    expect(&["frobnicate"], 1, "invalid-input");
    expect(&["identities", "--mode", "approximate"], 1, "invalid-input");

    fs::write(dir.path().join("cfg.json"), r#"{"seed": 1, "colour": "blue"}"#).unwrap();
    expect(&["--config", "cfg.json", "identities"], 1, "invalid-input");

    fs::write(dir.path().join("bad_eta.json"), r#"{"eta": [[1,0,0,0],[0,-1,0,0],[0,0,1,0],[0,0,0,1]]}"#).unwrap();
    expect(&["fibration", "--spec", "bad_eta.json"], 2, "not-positive-definite");

    let out = common::bin().args(["identities"]).env("G2LAB_THREADS", "zero").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_and_version_exit_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    for flag in ["--help", "--version"] {
        let out = run(&[flag], dir.path());
        assert_eq!(out.status.code(), Some(0));
        assert!(!out.stdout.is_empty());
    }
}

#[test]
fn config_file_feeds_flags() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("cfg.json"), r#"{"lattice": [4, 4, 4, 4], "seed": 9, "group": "u1", "flux": [1, 0, 0, 0, 0, 1]}"#).unwrap();
    let v = ok(&["--config", "cfg.json", "flow", "--out", "u.lat", "--seed", "10"], dir.path());
    assert_eq!((v["seed"].as_u64(), v["group"].as_str(), v["expected_charge"].as_f64()), (Some(10), Some("u1"), Some(-1.0)));
    assert_eq!(v["lattice"], json!([4, 4, 4, 4]));
}

#[test]
fn report_is_deterministic_and_valid() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| ["report", "--lattice", "4x4x4x4", "--tgrid", "2x2x2", "--seed", "5", "--out", out];
    let first = run(&args("a.json"), dir.path());
    let second = run(&args("b.json"), dir.path());
    assert_eq!(first.status.code(), second.status.code());
    let a = fs::read(dir.path().join("a.json")).unwrap();
    let b = fs::read(dir.path().join("b.json")).unwrap();
    assert_eq!(a, b, "report JSON differs between identical runs");
    assert_eq!(first.stdout, second.stdout);
    let table = String::from_utf8(first.stdout).unwrap();
    assert!(table.starts_with("section"));

    let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_schema(&v, "report");
    assert!(v["period_formula"].as_str().unwrap().contains("theta"));
    let rows = v["checks"].as_array().unwrap();
    assert_eq!(table.lines().count(), rows.len() + 2);
}

#[test]
fn validator_rejects_wrong_documents() {
    let schema = common::schema("error");
    let good = json!({"error": {"kind": "io", "message": "m", "exit_code": 1}});
    assert!(violations(&good, &schema, "").is_empty());
    let bad = json!({"error": {"kind": "io", "message": "m", "exit_code": 3, "extra": true}});
    assert_eq!(violations(&bad, &schema, "").len(), 2);
    assert_eq!(violations(&json!({}), &schema, "").len(), 1);
}
