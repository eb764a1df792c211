//! End-to-end runs of the `plurilab` binary.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("plurilab-cli-{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn plurilab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_plurilab")).args(args).output().unwrap()
}

#[test]
fn holder_failure_writes_a_report_and_table() {
    let out = scratch("holder");
    let status = plurilab(&["holder-failure", "--domain", "omega_phi", "--n", "2", "--alphas", "0.25,0.5,1", "--out", out.to_str().unwrap()]);
    assert_eq!(status.status.code(), Some(0), "{}", String::from_utf8_lossy(&status.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("holder-failure.json")).unwrap()).unwrap();
    assert_eq!(report["schema"], "plurilab/1");
    assert_eq!(report["input"]["domain"], "omega_phi");
    assert_eq!(report["input"]["alphas"], serde_json::json!([0.25, 0.5, 1.0]));
    assert!(report["tolerances"].as_object().is_some_and(|t| !t.is_empty()));
    let csv = fs::read_to_string(out.join("holder-failure.csv")).unwrap();
    assert_eq!(csv.lines().count(), 16);
}

#[test]
fn outputs_are_deterministic_under_a_fixed_seed() {
    let (a, b) = (scratch("det-a"), scratch("det-b"));
    for dir in [&a, &b] {
        for cmd in ["holder-failure", "geodesic-extend", "ma-pullback"] {
            let run = plurilab(&[cmd, "--seed", "7", "--budget", "1000", "--out", dir.to_str().unwrap()]);
            assert_eq!(run.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&run.stderr));
        }
    }
    for file in ["holder-failure.json", "holder-failure.csv", "geodesic-extend.json", "geodesic-extend.csv", "ma-pullback.json"] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file} differs");
    }
}

#[test]
fn input_errors_exit_with_two() {
    let out = scratch("bad");
    let bad_domain = plurilab(&["kobayashi-bounds", "--domain", "torus", "--out", out.to_str().unwrap()]);
    assert_eq!(bad_domain.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_domain.stderr).contains("unknown domain"));
    assert_eq!(plurilab(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(plurilab(&["extension-check", "--map", "nope", "--out", out.to_str().unwrap()]).status.code(), Some(2));
    let config = out.join("bad.toml");
    fs::write(&config, "colour = \"blue\"\n").unwrap();
    assert_eq!(plurilab(&["canonical", "--config", config.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn config_file_overrides_flags() {
    let out = scratch("config");
    let config = out.join("run.toml");
    fs::write(&config, format!("domain = \"ball\"\nn = 3\nout = \"{}\"\n", out.display())).unwrap();
    let run = plurilab(&["kobayashi-bounds", "--domain", "polydisc", "--config", config.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("kobayashi-bounds.json")).unwrap()).unwrap();
    assert_eq!(report["input"]["domain"], "ball");
    assert_eq!(report["input"]["n"], 3);
    assert!(report["violations"].as_array().unwrap().is_empty());
}
