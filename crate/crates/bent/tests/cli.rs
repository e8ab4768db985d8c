use std::path::Path;
use std::process::{Command, Output};

use bent::dump;

const SMALL: &str = r#"
[state]
variant = "shifted_thermal"
nbar = 1.0
lambda = 0.5
omega = { magnitude = 1e-3 }

[numerics]
n_max = 32

[range_search]
n_max = 6
restarts = 4
"#;

fn bent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bent"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn version_and_help() {
    let out = bent(&["version"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("bent "));
    let help = String::from_utf8(bent(&["--help"]).stdout).unwrap();
    assert!(help.contains("BENT_THREADS"));
    assert!(help.contains("18  partial transpose leaks between blocks"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(bent(&["certify"]).status.code(), Some(2));
    assert_eq!(bent(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn config_and_io_errors_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", &SMALL.replace("lambda = 0.5", "lambda = 2.0"));
    assert_eq!(bent(&["certify", "--config", &bad]).status.code(), Some(3));
    let missing = dir.path().join("absent.toml");
    assert_eq!(
        bent(&["certify", "--config", missing.to_str().unwrap()]).status.code(),
        Some(4)
    );
    let good = write(dir.path(), "good.toml", SMALL);
    let threads = Command::new(env!("CARGO_BIN_EXE_bent"))
        .args(["certify", "--config", &good])
        .env("BENT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(threads.status.code(), Some(3));
}

#[test]
fn certify_writes_report_and_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "c.toml", SMALL);
    let report = dir.path().join("out/report.json");
    let dumps = dir.path().join("dumps");
    let out = bent(&[
        "certify",
        "--config",
        &config,
        "--out",
        report.to_str().unwrap(),
        "--dump-dir",
        dumps.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["ppt"]["verdict"], "PPT");
    assert_eq!(json["input"]["numerics"]["n_max"], 32);
    assert!(json["meta"]["timing"]["total_ms"].is_number());

    let rho = dump::read_file(&dumps.join("rho.bent")).unwrap();
    let pt = dump::read_file(&dumps.join("rho_pt.bent")).unwrap();
    assert_eq!(rho.shape(), (1089, 1089));
    assert!((rho.trace().re - 1.0).abs() < 1e-12);
    assert!((pt.trace() - rho.trace()).norm() < 1e-15);
}

#[test]
fn unmixed_state_is_npt_with_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "c.toml", &SMALL.replace("lambda = 0.5", "lambda = 1.0"));
    let out = bent(&["certify", "--config", &config]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["verdict"], "NPT");
    assert!(json["gerschgorin"]["omega_bound"].is_null());
}

#[test]
fn sweep_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "c.toml", SMALL);
    let empty = write(dir.path(), "empty.toml", "");
    assert_eq!(
        bent(&["sweep", "--config", &config, "--grid", &empty]).status.code(),
        Some(3)
    );

    let grid = write(dir.path(), "grid.toml", "omega = [1e-3, 0.9]\n");
    let out_dir = dir.path().join("sweep");
    let out = bent(&[
        "sweep",
        "--config",
        &config,
        "--grid",
        &grid,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("0.001,"));
    assert!(rows[2].ends_with(",NPT"));
    assert!(out_dir.join("report_0001.json").exists());

    let out = bent(&["sweep", "--config", &config, "--grid", &grid, "--bisect", "omega"]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["status"], "bracketed");
    let (lo, hi) = (json["ppt_below"].as_f64().unwrap(), json["npt_above"].as_f64().unwrap());
    assert!(lo >= 1e-3 && hi / lo - 1.0 < 1e-4);
}
