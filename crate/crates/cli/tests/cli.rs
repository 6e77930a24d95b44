use std::path::Path;
use std::process::{Command, Output};

use corner_penalty::harness::{read_csv, Table};

const ACUTE: &str = "alpha = 2\ntheta_bar = 1.0471975511965976\nk = 100\nhorizon = 3\n";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_corner-penalty"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.cfg");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout_table(out: &Output) -> Table {
    Table::from_csv_str(std::str::from_utf8(&out.stdout).unwrap()).unwrap()
}

#[test]
fn simulate_writes_three_phases() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), ACUTE);
    let csv = dir.path().join("traj.csv");
    let out = run(&["simulate", "--config", &cfg, "--out", csv.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let t = read_csv(&csv).unwrap();
    assert_eq!(t.columns, ["t", "u1", "u2", "v1", "v2", "phase"]);
    let i = t.column_index("phase").unwrap();
    let mut labels: Vec<String> = t.rows.iter().map(|r| r[i].to_string()).collect();
    labels.dedup();
    assert_eq!(labels, ["R1-phase", "corner", "R3-phase"]);
    let ts = t.column("t").unwrap();
    assert!(ts.windows(2).all(|w| w[1] > w[0]));
    assert_eq!(*ts.last().unwrap(), 3.0);
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), ACUTE);
    let a = run(&["simulate", "--config", &cfg]);
    let b = run(&["simulate", "--config", &cfg]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn converge_single_k_has_no_order() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), ACUTE);
    let out = run(&["converge", "--config", &cfg, "--k", "400"]);
    assert_eq!(out.status.code(), Some(0));
    let t = stdout_table(&out);
    assert_eq!(t.rows.len(), 1);
    assert_eq!(t.column("k").unwrap(), [400.0]);
    assert!(t.column("order").unwrap()[0].is_nan());
}

#[test]
fn converge_default_sweep_shrinks() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "alpha = 2\ntheta_bar = 1.0471975511965976\n");
    let out = run(&["converge", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let e = stdout_table(&out).column("sup_error").unwrap();
    assert_eq!(e.len(), 3);
    assert!(e[2] < e[1] && e[1] < e[0]);
}

#[test]
fn asym_report_exit_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), ACUTE);
    let out = run(&["asym-report", "--config", &cfg, "--eta", "1e-3"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let t = stdout_table(&out);
    let r = t.column("exit_ratio").unwrap()[0];
    assert!((0.95..=1.05).contains(&r), "{r}");
}

#[test]
fn phase_portrait_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "alpha = 2\ntheta_bar = 1\ngrid_n = 4\n");
    let out = run(&["phase-portrait", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let t = stdout_table(&out);
    assert_eq!(t.rows.len(), 17);
    assert_eq!(t.column("critical").unwrap().iter().sum::<f64>(), 1.0);
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), ACUTE);
    for args in [
        vec!["simulate", "--config", &cfg, "--theta-bar", "4"],
        vec!["simulate", "--config", &cfg, "--eta", "1e-3"],
        vec!["asym-report", "--config", &cfg, "--eta", "2"],
        vec!["simulate", "--config", "/nonexistent/run.cfg"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    }
    let bad = write_config(dir.path(), "alpha = 0.5\ntheta_bar = 1\n");
    let out = run(&["simulate", "--config", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn underflow_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), ACUTE);
    let out = run(&["simulate", "--config", &cfg, "--k", "1e9"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn help_documents_columns() {
    let out = run(&["converge", "--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("sup_error"));
    let out = run(&["simulate", "--help"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("R3-phase"));
}
