use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mudflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mudflow")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("run.json");
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

const SMALL_RUN: &str = r#"{
  "params": {"gamma": 0.1, "rho_m": 1.2,
             "viscosity": {"model": "hectorite", "mu_inf": 1, "tau0": 1, "beta": 1}},
  "grid": {"nx": 16, "ny_w": 9, "ny_m": 9},
  "initial": {"shape": "cosine", "k": 1, "amplitude": 0.01},
  "boundary": {"kind": "constant", "value": 0.5},
  "run": {"t_end": 0.1, "dt": 0.02}
}"#;

#[test]
fn simulate_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_RUN);
    let out = dir.path().join("out");
    let o = mudflow(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["trajectory.csv", "diagnostics.csv", "snapshot.json", "summary.json", "interface.svg", "amplitudes.svg"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["termination"]["status"], "completed");
    assert_eq!(summary["steps"], 5);
}

#[test]
fn runs_are_bitwise_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_RUN);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        assert!(mudflow(&["simulate", "--config", &cfg, "--out", d.to_str().unwrap()]).status.success());
    }
    for f in ["trajectory.csv", "diagnostics.csv", "summary.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
    let state = |d: &Path| -> serde_json::Value {
        let s: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("snapshot.json")).unwrap()).unwrap();
        s["state"].clone()
    };
    assert_eq!(state(&a), state(&b));
}

#[test]
fn restart_continues_the_same_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_RUN);
    let (full, half, rest) = (dir.path().join("full"), dir.path().join("half"), dir.path().join("rest"));
    assert!(mudflow(&["simulate", "--config", &cfg, "--out", full.to_str().unwrap()]).status.success());
    assert!(mudflow(&["simulate", "--config", &cfg, "--t-end", "0.06", "--out", half.to_str().unwrap()])
        .status
        .success());
    let snap = half.join("snapshot.json");
    let o = mudflow(&["simulate", "--restart", snap.to_str().unwrap(), "--t-end", "0.1", "--out", rest.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let last = |d: &Path| -> Vec<f64> {
        let s: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("snapshot.json")).unwrap()).unwrap();
        s["state"]["f"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect()
    };
    let (a, b) = (last(&full), last(&rest));
    let gap = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(gap <= 1e-15, "restart drifted by {gap:e}");
}

#[test]
fn config_errors_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"params": {"gamma": -1}, "grid": {"nx": 15}}"#);
    let o = mudflow(&["simulate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("gamma") && err.contains("grid.nx"), "{err}");

    let cfg = write_config(dir.path(), "{\"grid\": {\"nx\": 16,}}");
    assert_eq!(mudflow(&["simulate", "--config", &cfg]).status.code(), Some(3));
    assert_eq!(mudflow(&["simulate", "--config", "/definitely/missing.json"]).status.code(), Some(4));
    assert_eq!(mudflow(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn linearize_and_check_viscosity() {
    let o = mudflow(&["linearize", "--k-max", "2", "--json"]);
    assert!(o.status.success());
    let rows: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let t = 1.0f64.tanh();
    assert!((rows[0]["m"].as_f64().unwrap() - (1.0 + t * t)).abs() < 1e-14);

    let ok = mudflow(&["check-viscosity", "--model", "hectorite", "--mu-inf", "1", "--tau0", "3.9", "--beta", "1"]);
    assert_eq!(ok.status.code(), Some(0));
    let bad = mudflow(&["check-viscosity", "--model", "hectorite", "--mu-inf", "1", "--tau0", "4", "--beta", "1"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("NOT admissible"));
}

#[test]
fn dispersion_subcommand_matches_symbols() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"grid": {"nx": 16, "ny_w": 9, "ny_m": 9}, "run": {"t_end": 0.5, "dt": 0.01}}"#,
    );
    let o = mudflow(&["dispersion", "--config", &cfg, "--k-min", "1", "--k-max", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8_lossy(&o.stdout);
    let worst: f64 = text.lines().last().unwrap().rsplit(' ').next().unwrap().parse().unwrap();
    assert!(worst < 0.02, "{text}");
}
