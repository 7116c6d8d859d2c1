use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("galine-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn galine(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_galine")).args(args).env("GALINE_LOG", "error").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn read_json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL: &str = r#""grid": {"q_min": -8, "q_max": 8, "n_points": 256},
    "integrator": {"horizon": 0.2, "dt": 0.005}"#;

#[test]
fn config_errors_exit_2() {
    let d = scratch("config");
    let out = d.to_string_lossy().into_owned();
    let bad = write(&d, "bad.json", "{\"beta\": [1,");
    assert_eq!(code(&galine(&["verify", "--scenario", &bad, "--out", &out])), 2);
    let unknown = write(&d, "unknown.json", r#"{"beta":[1],"gamma":[0,1],"mass":1}"#);
    assert_eq!(code(&galine(&["verify", "--scenario", &unknown, "--out", &out])), 2);
    assert_eq!(code(&galine(&["verify", "--suite", "nope", "--out", &out])), 2);
    assert_eq!(code(&galine(&["verify", "--seed", "x"])), 2);
    let missing = d.join("absent.json").to_string_lossy().into_owned();
    assert_eq!(code(&galine(&["classical", "--scenario", &missing, "--out", &out])), 2);
}

#[test]
fn verify_suites_and_determinism() {
    let d = scratch("verify");
    let out = d.to_string_lossy().into_owned();
    let spec = write(&d, "spec.json", r#"{"beta":["2","1/3"],"gamma":["0","1","1/4"]}"#);
    let args = [
        "verify",
        "--scenario",
        &spec,
        "--out",
        &out,
        "--samples",
        "5",
        "--suite",
        "dd-zero,cocycle-condition,galilei-reduction,composition-defect-b0,commutator,bc-constraints",
    ];
    let o = galine(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let first = std::fs::read(d.join("verify.json")).unwrap();
    assert_eq!(code(&galine(&args)), 0);
    assert_eq!(first, std::fs::read(d.join("verify.json")).unwrap());
    let v = read_json(d.join("verify.json"));
    assert_eq!(v["passed"], true);
    assert_eq!(v["suites"].as_array().unwrap().len(), 6);
}

#[test]
fn general_composition_defect_fails_with_witness() {
    let d = scratch("composition");
    let out = d.to_string_lossy().into_owned();
    let o = galine(&["verify", "--out", &out, "--samples", "5", "--suite", "composition-defect"]);
    assert_eq!(code(&o), 1);
    let v = read_json(d.join("verify.json"));
    assert!(v["suites"][0]["reports"][0]["violations"][0]["defect"].is_string());
}

#[test]
fn negative_control_exits_1_with_witness() {
    let d = scratch("negative");
    let out = d.to_string_lossy().into_owned();
    let o = galine(&["verify", "--out", &out, "--negative-control", "--samples", "4", "--suite", "cocycle-condition"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("witness"));
    let v = read_json(d.join("verify.json"));
    assert!(v["suites"][0]["reports"][0]["violations"][0]["residual"].is_string());
    let o = galine(&["cocycle-check", "--out", &out, "--negative-control"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn cocycle_check_rejects_zero_mass() {
    let d = scratch("cocycle");
    let out = d.to_string_lossy().into_owned();
    assert_eq!(code(&galine(&["cocycle-check", "--out", &out])), 0);
    let m0 = write(&d, "m0.json", r#"{"beta":["1"],"gamma":["1"]}"#);
    assert_eq!(code(&galine(&["cocycle-check", "--scenario", &m0, "--out", &out])), 1);
    let v = read_json(d.join("cocycle-check.json"));
    assert_eq!(v["embeddable"], false);
    assert_eq!(v["checks"][0]["passed"], false);
}

#[test]
fn commutators_dump() {
    let d = scratch("commutators");
    let out = d.to_string_lossy().into_owned();
    let o = galine(&["commutators", "--out", &out]);
    assert_eq!(code(&o), 0);
    let v = read_json(d.join("commutators.json"));
    assert_eq!(v["P"].as_array().unwrap().len(), 3);
    assert_eq!(v["hamiltonian"]["regrouping"]["half_a_q"], true);
}

#[test]
fn evolve_inertial_and_accelerated() {
    let d = scratch("evolve");
    let out = d.to_string_lossy().into_owned();
    let inertial = write(&d, "inertial.json", &format!(r#"{{"beta":["1"],"gamma":["0","1"], {SMALL}}}"#));
    assert_eq!(code(&galine(&["evolve", "--scenario", &inertial, "--out", &out])), 0);
    let v = read_json(d.join("evolve.json"));
    assert!(v["accel"]["mean"].as_f64().unwrap().abs() < 1e-3);
    assert!(d.join("evolve.csv").exists());

    let accel = write(
        &d,
        "accel.json",
        &format!(r#"{{"beta":["1"],"gamma":["0","1"],"frame":{{"a":["0","0","1/2"]}}, {SMALL}}}"#),
    );
    assert_eq!(code(&galine(&["evolve", "--scenario", &accel, "--out", &out])), 0);
    let v = read_json(d.join("evolve.json"));
    assert!((v["accel"]["mean"].as_f64().unwrap().abs() - 0.5).abs() < 1e-3, "{v}");
    assert!((v["frame_accel"]["mean"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    let csv = std::fs::read_to_string(d.join("evolve.csv")).unwrap();
    assert!(csv.starts_with("b,re_norm,x_mean,p_mean,x_accel,global_phase\n"));
}

#[test]
fn evolve_sweep_writes_pairs() {
    let d = scratch("sweep");
    let out = d.to_string_lossy().into_owned();
    let accel = write(
        &d,
        "accel.json",
        &format!(r#"{{"beta":["1"],"gamma":["0","1"],"frame":{{"a":["0","0","1/2"]}}, {SMALL}}}"#),
    );
    let o = galine(&["evolve", "--scenario", &accel, "--out", &out, "--sweep", "beta1=0,0.3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(d.join("evolve_beta1_0.csv").exists() && d.join("evolve_beta1_0.3.csv").exists());
    let v = read_json(d.join("evolve_sweep.json"));
    assert_eq!(v["diffs"][0]["accel_equal"], true);
    assert!(v["diffs"][0]["phase_max_diff"].as_f64().unwrap() > 0.0);
    assert_eq!(code(&galine(&["evolve", "--scenario", &accel, "--out", &out, "--sweep", "mass=1,2"])), 2);
}

#[test]
fn classical_and_report() {
    let d = scratch("classical");
    let out = d.to_string_lossy().into_owned();
    let s = write(
        &d,
        "c.json",
        r#"{"beta":["1","1/2"],"gamma":["0","1"],"frame":{"a":["0","1","1/2","1/3"]},
            "classical":{"masses":[1.0,2.7],"v0":0.3}}"#,
    );
    assert_eq!(code(&galine(&["classical", "--scenario", &s, "--out", &out])), 0);
    assert!(d.join("classical_m1.csv").exists() && d.join("classical_m2.7.csv").exists());
    let v = read_json(d.join("classical.json"));
    assert!(v["masses"][1]["max_accel_defect"].as_f64().unwrap() < 1e-9);
    let o = galine(&["report", "--out", &out]);
    assert_eq!(code(&o), 0);
    assert_eq!(read_json(d.join("report.json"))["passed"], true);
    let empty = scratch("empty");
    assert_eq!(code(&galine(&["report", "--out", &empty.to_string_lossy()])), 2);
}
