use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(cmd: &str, cfg: &Path, out: &Path, seed: Option<u64>) -> i32 {
    let mut c = Command::new(env!("CARGO_BIN_EXE_quasilocal"));
    c.arg(cmd).arg("--config").arg(cfg).arg("--out").arg(out);
    if let Some(s) = seed {
        c.arg("--seed").arg(s.to_string());
    }
    c.output().unwrap().status.code().unwrap()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn write_cfg(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("exp.cfg");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn onsite_scan_csv_is_exactly_zero() {
    let out = tempfile::tempdir().unwrap();
    assert_eq!(run("scan", &config("scan_dephasing.cfg"), out.path(), None), 0);
    let csv = std::fs::read_to_string(out.path().join("report.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "volume_size,time,increment,norm,wall_ms");
    let mut increments = 0;
    for line in lines {
        let inc = line.split(',').nth(2).unwrap();
        if !inc.is_empty() {
            assert_eq!(inc, "0.0", "{line}");
            increments += 1;
        }
    }
    assert_eq!(increments, 4);
}

#[test]
fn zero_time_scan_returns_the_observable() {
    let out = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        out.path(),
        "model.name = ising_dephasing\nobservable.label = Z\nevolution.times = [0.0]\nschedule.steps = 3\nrun.seed = 3\n",
    );
    assert_eq!(run("scan", &cfg, out.path(), None), 0);
    let r = report(out.path());
    for rec in r["payload"]["reports"][0]["records"].as_array().unwrap() {
        assert_eq!(rec["norm"].as_f64().unwrap(), 1.0);
    }
}

#[test]
fn payload_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(run("verify", &config("verify_ising.cfg"), a.path(), Some(11)), 0);
    assert_eq!(run("verify", &config("verify_ising.cfg"), b.path(), Some(11)), 0);
    let (ra, rb) = (report(a.path()), report(b.path()));
    assert_eq!(ra["payload_sha256"], rb["payload_sha256"]);
    assert_eq!(serde_json::to_vec(&ra["payload"]).unwrap(), serde_json::to_vec(&rb["payload"]).unwrap());
    assert_eq!(ra["config"]["seed"], 11);
}

#[test]
fn transpose_control_fails_verification() {
    let out = tempfile::tempdir().unwrap();
    assert_eq!(run("verify", &config("verify_transpose.cfg"), out.path(), None), 1);
    let r = report(out.path());
    assert_eq!(r["passed"], false);
}

#[test]
fn unknown_key_is_a_config_error() {
    let out = tempfile::tempdir().unwrap();
    let cfg = write_cfg(out.path(), "model.name = dephasing\nmodel.colour = 3\nrun.seed = 1\n");
    assert_eq!(run("scan", &cfg, out.path(), None), 2);
    assert!(!out.path().join("report.json").exists());
}

#[test]
fn missing_seed_is_a_config_error() {
    let out = tempfile::tempdir().unwrap();
    let cfg = write_cfg(out.path(), "model.name = dephasing\n");
    assert_eq!(run("scan", &cfg, out.path(), None), 2);
    assert_eq!(run("scan", &cfg, out.path(), Some(4)), 0);
}

#[test]
fn capacity_failure_keeps_a_partial_report() {
    let out = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        out.path(),
        "model.name = ising_dephasing\nbackend.kind = exact\nbackend.exact_cap = 64\nschedule.steps = 4\nrun.seed = 2\n",
    );
    assert_eq!(run("scan", &cfg, out.path(), None), 3);
    let r = report(out.path());
    assert_eq!(r["partial"], true);
    assert!(r["error"].as_str().unwrap().contains("capacity"), "{}", r["error"]);
}

#[test]
fn kraus_of_identity_is_single_operator() {
    let out = tempfile::tempdir().unwrap();
    let cfg = write_cfg(out.path(), "channel.source = identity\nchannel.sites = 1\ntensor.k = []\nrun.seed = 1\n");
    assert_eq!(run("kraus", &cfg, out.path(), None), 0);
    assert_eq!(report(out.path())["payload"]["count"], 1);
}

#[test]
fn kraus_of_dephasing_has_expected_weights() {
    let out = tempfile::tempdir().unwrap();
    assert_eq!(run("kraus", &config("kraus_dephasing.cfg"), out.path(), None), 0);
    let p = &report(out.path())["payload"];
    let mut w: Vec<f64> = p["weights"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    w.sort_by(|a, b| b.partial_cmp(a).unwrap());
    assert_eq!(w.len(), 2);
    assert!((w[0] - 1.5).abs() <= 1e-12 && (w[1] - 0.5).abs() <= 1e-12, "{w:?}");
}

#[test]
fn kraus_of_lindblad_channel_reconstructs() {
    let out = tempfile::tempdir().unwrap();
    assert_eq!(run("kraus", &config("kraus_lindblad.cfg"), out.path(), None), 0);
    let p = &report(out.path())["payload"];
    assert!(p["reconstruction_defect"].as_f64().unwrap() <= 1e-9);
    assert!(p["normalization_defect"].as_f64().unwrap() <= 1e-9);
}
