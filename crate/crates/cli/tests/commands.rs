use std::process::{Command, Output};

use serde_json::Value;

fn wholepartial(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wholepartial")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let out = wholepartial(&full);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).expect("valid JSON");
    assert_eq!(v["schema"], 1);
    v
}

fn re(v: &Value) -> f64 {
    v[0].as_f64().unwrap()
}

fn im(v: &Value) -> f64 {
    v[1].as_f64().unwrap()
}

#[test]
fn derive_energy_gradient() {
    let v = json(&["derive", "E", "--var", "p1", "--at", "p=3,0,0", "m=4"]);
    assert_eq!(v["result"], "p1/E");
    assert!((re(&v["value"]) - 0.6).abs() < 1e-12);
}

#[test]
fn derive_agrees_with_finite_difference() {
    let v = json(&["derive", "E*p1", "--var", "p1", "--at", "p=1,0,0", "m=0"]);
    assert!((re(&v["value"]) - 2.0).abs() < 1e-12);
    assert_eq!(v["fd"]["agree"], true);
}

#[test]
fn malformed_expression_exits_2() {
    let out = wholepartial(&["derive", "E*(p1", "--var", "p1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("byte 5"));
}

#[test]
fn unbound_symbol_exits_3() {
    let out = wholepartial(&["derive", "q*E", "--var", "p1", "--at", "p=1,0,0", "m=1"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn commute_energy_momentum() {
    let v = json(&["commute", "E*p1", "p1", "E", "--at", "p=1,0,0", "m=0"]);
    assert!((re(&v["value"]) - 1.0).abs() < 1e-12);
    assert!(v["residual"].as_f64().unwrap() <= 1e-10);
    assert!(v["closed_form_residual"]["max_rel"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn commute_without_energy_dependence_vanishes() {
    let v = json(&["commute", "p3^2", "p1", "E"]);
    assert_eq!(v["identically_zero"], true);
    assert_eq!(v["result"], "0");
}

#[test]
fn commute_with_magnetic_momenta() {
    // f = E^2 p1 gives (1/E^3)(2 E p1)(i B3) = i/2 at E = 2, p1 = 1, B3 = 1.
    let v = json(&["commute", "E^2*p1", "p1", "p2", "--pcomm", "i*B3", "--at", "E=2", "B3=1", "p=1,0,0"]);
    assert!(re(&v["value"]).abs() < 1e-12);
    assert!((im(&v["value"]) - 0.5).abs() < 1e-12);
}

#[test]
fn verify_passes_at_default_tolerances() {
    let out = wholepartial(&["verify", "--seed", "42"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn verify_over_tight_tolerance_exits_1() {
    let out = wholepartial(&["--json", "verify", "--tol", "1e-15"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], false);
    let failed = v["checks"].as_array().unwrap().iter().filter(|c| c["status"] == "fail").count();
    assert!(failed > 0);
}

#[test]
fn json_output_is_reproducible() {
    let args = ["--json", "commute", "exp(E)*sinh(p2)", "p2", "E", "--samples", "20"];
    assert_eq!(wholepartial(&args).stdout, wholepartial(&args).stdout);
}
