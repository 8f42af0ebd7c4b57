//! End-to-end checks of the command-line interface: exit codes, file
//! inventory, reproducibility of emitted artifacts.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fracsieve"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|e| panic!("missing {name}: {e}"))
}

#[test]
fn params_report_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "params",
        "--out",
        dir.path().to_str().unwrap(),
        "--set",
        "n_to=1000",
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report = String::from_utf8(read(dir.path(), "params_report.json")).unwrap();
    assert!(report.contains("\"ladder\""));
    assert!(report.contains("2499"));
    assert!(report.contains("\"log_convention\": \"natural\""));
    let manifest = String::from_utf8(read(dir.path(), "manifest.txt")).unwrap();
    assert!(manifest.contains("command = params"));
    assert!(manifest.contains("params_report.json sha256="));
}

#[test]
fn witness_run_is_reproducible() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    for d in [&d1, &d2] {
        let out = run(&[
            "witness",
            "--out",
            d.path().to_str().unwrap(),
            "--set",
            "n_to=500",
        ]);
        assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["certificate.json", "scores.csv", "stats.csv", "survivors.json"] {
        assert_eq!(
            read(d1.path(), name),
            read(d2.path(), name),
            "{name} differs between identical runs"
        );
    }
    let cert = String::from_utf8(read(d1.path(), "certificate.json")).unwrap();
    assert!(cert.contains("\"verdict\": true"));
}

#[test]
fn certify_round_trip_via_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "witness",
        "--out",
        dir.path().to_str().unwrap(),
        "--set",
        "n_to=300",
    ]);
    assert!(out.status.success());
    let cert_path = dir.path().join("certificate.json");
    let redir = tempfile::tempdir().unwrap();
    let out = run(&[
        "certify",
        "--certificate",
        cert_path.to_str().unwrap(),
        "--out",
        redir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let re = String::from_utf8(read(redir.path(), "certificate.json")).unwrap();
    assert!(re.contains("\"verdict\": true"));
    // byte-identical scores between original emission and re-verification
    assert_eq!(read(dir.path(), "scores.csv"), read(redir.path(), "scores.csv"));
}

#[test]
fn exit_code_verdict_false() {
    // α = 1/2 fails at n = 2 (‖2‖ = 0): distinct exit code 5
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "certify",
        "--out",
        dir.path().to_str().unwrap(),
        "--set",
        "alpha_num=1",
        "--set",
        "alpha_level=1",
        "--set",
        "n_from=2",
        "--set",
        "n_to=100",
    ]);
    assert_eq!(out.status.code(), Some(5));
    let cert = String::from_utf8(read(dir.path(), "certificate.json")).unwrap();
    assert!(cert.contains("\"verdict\": false"));
}

#[test]
fn exit_code_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "params",
        "--out",
        dir.path().to_str().unwrap(),
        "--set",
        "no_such_key=1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("no_such_key"), "stderr: {err}");
}

#[test]
fn exit_code_empty_survivors() {
    // c = 0.19 removes everything within a few stages
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "sieve",
        "--out",
        dir.path().to_str().unwrap(),
        "--set",
        "c_mode=custom",
        "--set",
        "c_value=19/100",
        "--set",
        "n_start=8",
        "--set",
        "n_from=8",
        "--set",
        "n_to=64",
        "--set",
        "window=0:0",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("empty"), "stderr: {err}");
}

#[test]
fn dimension_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["dimension", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report = String::from_utf8(read(dir.path(), "dimension_report.json")).unwrap();
    assert!(report.contains("\"estimate\""));
    assert!(report.contains("349525"));
    assert!(report.contains("\"omega_exact\": \"-141/500\""));
}

#[test]
fn config_file_plus_override() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "n_to = 400\nseed = 7\nstrategy = max-run\n").unwrap();
    let out_dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "witness",
        "--config",
        conf.to_str().unwrap(),
        "--out",
        out_dir.path().to_str().unwrap(),
        "--set",
        "n_to=300",
    ]);
    assert!(out.status.success());
    let manifest = String::from_utf8(read(out_dir.path(), "manifest.txt")).unwrap();
    // override wins over the file; both recorded in the echo
    assert!(manifest.contains("n_to = 300"));
    assert!(manifest.contains("seed = 7"));
    assert!(manifest.contains("strategy = max-run"));
}
