use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_wallcross");

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("wallcross-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write_config(name: &str, text: &str) -> PathBuf {
    let p = scratch(name);
    std::fs::write(&p, text).unwrap();
    p
}

/// Runs the binary; returns (exit code, stdout).
fn run(args: &[&str]) -> (i32, String) {
    let out = Command::new(BIN).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap())
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|e| panic!("{e}: {text}"))
}

fn check_header(r: &Value, command: &str) {
    assert_eq!(r["schema"], "wallcross-report/1");
    assert_eq!(r["command"], command);
    assert!(r["status"].is_string());
}

const A1: &str = "[surface]\ncoeffs = [[-1.0, 0.0], [0.0, 0.0], [1.0, 0.0]]\n";

#[test]
fn a1_spectrum_has_one_ray() {
    let cfg = configs().join("a1_spectrum.toml");
    let (code, out) = run(&["spectrum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    let r = json(&out);
    check_header(&r, "spectrum");
    let rays = r["rays"].as_array().unwrap();
    assert_eq!(rays.len(), 1);
    assert!((rays[0]["abs_z"].as_f64().unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-6);
    assert_eq!(rays[0]["class"], serde_json::json!([1]));
    assert_eq!(rays[0]["classification"], "case1");
    assert_eq!(rays[0]["omega"], 1);
}

#[test]
fn single_zero_has_empty_spectrum() {
    let cfg = write_config("a0.toml", "sector = [0.2, 1.2]\n[surface]\ncoeffs = [[0.0, 0.0], [1.0, 0.0]]\n");
    let (code, out) = run(&["spectrum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["rays"].as_array().unwrap().len(), 0);
}

#[test]
fn small_cap_is_a_cap_error() {
    let cfg = write_config("a1cap.toml", &format!("sector = [0.7853981633974483, 2.356194490192345]\ncap = 1.0\n{A1}"));
    let (code, out) = run(&["spectrum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 3);
    let r = json(&out);
    assert_eq!(r["status"], "CAP_EXCEEDED");
    assert_eq!(r["beyond_cap"].as_array().unwrap().len(), 1);
}

#[test]
fn pentagon_passes_and_order_matters() {
    let cfg = configs().join("pentagon.toml");
    let (code, out) = run(&["verify-wcf", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    check_header(&json(&out), "verify-wcf");
    let (code, out) = run(&["verify-wcf", "--config", cfg.to_str().unwrap(), "--order", "ccw"]);
    assert_eq!(code, 1);
    assert_eq!(json(&out)["status"], "FAIL");
}

#[test]
fn corrupted_omega_is_localized() {
    let text = std::fs::read_to_string(configs().join("pentagon.toml")).unwrap();
    let bad = text.replace("{ class = [1, 1], phase", "{ class = [1, 1], omega = 2, phase");
    assert_ne!(bad, text);
    let cfg = write_config("bad_pentagon.toml", &bad);
    let (code, out) = run(&["verify-wcf", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 1);
    let r = json(&out);
    assert_eq!(r["status"], "FAIL");
    let d = &r["difference"];
    assert!(d["term"].is_array() && d["left"] != d["right"], "{d}");
}

#[test]
fn network_svg_highlights_saddles() {
    for (phase, cap, expected) in [(std::f64::consts::FRAC_PI_2, 10.0, 1), (0.0, 10.0, 0), (0.3, 0.0, 0)] {
        let cfg = write_config(&format!("net{expected}{cap}.toml"), &format!("phase = {phase}\ncap = {cap}\n{A1}"));
        let svg = scratch(&format!("net{phase}-{cap}.svg"));
        let (code, out) =
            run(&["network-svg", "--config", cfg.to_str().unwrap(), "--out", svg.to_str().unwrap()]);
        assert_eq!(code, 0);
        let r = json(&out);
        assert_eq!(r["saddle_polylines"], expected);
        let doc = std::fs::read_to_string(&svg).unwrap();
        assert_eq!(doc.matches("class=\"saddle\"").count(), expected);
        assert_eq!(doc.matches("class=\"zero\"").count(), 2);
        if cap == 0.0 {
            assert_eq!(doc.matches("<polyline").count(), 0);
        } else {
            assert!(doc.contains("class=\"w-plus\"") && doc.contains("class=\"w-minus\""));
        }
    }
}

#[test]
fn outputs_are_deterministic() {
    let cfg = configs().join("a1_network.toml");
    let (a, b) = (scratch("det_a.svg"), scratch("det_b.svg"));
    run(&["network-svg", "--config", cfg.to_str().unwrap(), "--out", a.to_str().unwrap()]);
    run(&["network-svg", "--config", cfg.to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let spec = configs().join("a1_spectrum.toml");
    let (ra, rb) = (scratch("det_a.json"), scratch("det_b.json"));
    run(&["spectrum", "--config", spec.to_str().unwrap(), "--out", ra.to_str().unwrap()]);
    run(&["spectrum", "--config", spec.to_str().unwrap(), "--out", rb.to_str().unwrap()]);
    assert_eq!(std::fs::read(&ra).unwrap(), std::fs::read(&rb).unwrap());
}

#[test]
fn lamination_commands() {
    let (code, out) = run(&["fg", "--config", configs().join("fg.toml").to_str().unwrap()]);
    assert_eq!(code, 0);
    let r = json(&out);
    check_header(&r, "fg");
    assert_eq!(r["roundtrip"], r["coordinates"]);
    let (code, out) = run(&["approx", "--config", configs().join("approx.toml").to_str().unwrap()]);
    assert_eq!(code, 0);
    let r = json(&out);
    check_header(&r, "approx");
    assert!(r["steps"].as_u64().unwrap() > 1);
    assert!(r["steps"].as_u64().unwrap() <= r["step_bound"].as_u64().unwrap());
}

#[test]
fn verify_wall_passes() {
    let (code, out) = run(&["verify-wall"]);
    assert_eq!(code, 0);
    let r = json(&out);
    check_header(&r, "verify-wall");
    assert_eq!(r["models"].as_array().unwrap().len(), 18);
}

#[test]
fn bad_configs_are_rejected() {
    let (code, _) = run(&["spectrum"]);
    assert_eq!(code, 2);
    let cfg = write_config("bad.toml", "truncation = -1.0\n[surface]\ncoeffs = [[1.0, 0.0]]\n");
    let (code, _) = run(&["spectrum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
    let cfg = write_config("unknown.toml", "colour = 3\n[surface]\ncoeffs = [[1.0, 0.0]]\n");
    let (code, _) = run(&["spectrum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
    let (code, _) = run(&["spectrum", "--config", "/nonexistent/config.toml"]);
    assert_eq!(code, 6);
}
