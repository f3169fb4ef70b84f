use std::fs;
use std::process::Command;

use spectrum_sharing::experiments::COLUMNS;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spectrum-sharing"))
}

#[test]
fn small_sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "# quick run\nn = 2000\natten_grid_db = 0, 10\nscenario = out_out\n",
    )
    .unwrap();
    let out = dir.path().join("out.csv");
    let status = bin()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], COLUMNS.join(","));
    assert_eq!(lines.len(), 3);
}

#[test]
fn scenario_flag_overrides_config() {
    let a = bin()
        .args(["sweep", "--n", "2000", "--scenario", "er_er"])
        .output()
        .unwrap();
    let b = bin()
        .args(["sweep", "--n", "2000", "--scenario", "out_er"])
        .output()
        .unwrap();
    assert!(a.status.success() && b.status.success());
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn bad_config_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "n = 5000\nwat = 3\n").unwrap();
    let out = bin()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    fs::write(&cfg, "eps0_pr = 1.5\n").unwrap();
    let out = bin()
        .args(["sweep", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin().args(["sweep", "--n", "10"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_config_file_is_reported() {
    let out = bin()
        .args(["sweep", "--config", "/nonexistent/run.cfg"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn theorem_report_ends_with_summary() {
    let out = bin()
        .args(["theorems", "--n", "5000", "--seed", "3"])
        .output()
        .unwrap();
    assert!(matches!(out.status.code(), Some(0 | 1)));
    let text = String::from_utf8(out.stdout).unwrap();
    let last = text.lines().last().unwrap();
    assert!(last.contains("checks,"), "{last}");
    assert!(text.lines().all(|l| l.starts_with("PASS")
        || l.starts_with("FAIL")
        || l.starts_with("INFO")
        || l.contains("checks,")));
}
