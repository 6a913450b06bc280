use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sohb::io::read_raw_snapshot;

fn sohb(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sohb"))
        .args(args)
        .current_dir(dir)
        .env_remove("SOHB_THREADS")
        .output()
        .expect("run sohb")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.cfg");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn analyze_prints_one_row_per_sample() {
    let dir = tempfile::tempdir().unwrap();
    let out = sohb(&["analyze", "--n", "4", "--c1", "1", "--c2", "0.8", "--c3", "1", "--c4", "0.2", "--samples", "37"], dir.path());
    assert!(out.status.success(), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    let mut lines = stdout.lines();
    assert_eq!(lines.next().unwrap(), "theta,lambda_plus,lambda_minus,mu_plus,mu_minus,beta,verdict");
    assert_eq!(lines.count(), 37);
}

#[test]
fn relax_accepts_log_times() {
    let dir = tempfile::tempdir().unwrap();
    let out = sohb(&["relax", "--d0", "2", "--alpha", "1", "--t", "ln2"], dir.path());
    assert!(out.status.success());
    let row = text(&out.stdout).lines().nth(1).unwrap().to_string();
    let d: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
    assert!((d - 8.0 / 7.0).abs() < 1e-15, "{row}");
}

#[test]
fn invalid_config_reports_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[coefficients]\nc1 = 1\nc3 = -1\n[grid]\nn = 2\ncells = 8\n[scheme]\ncfl = 2\n[initial]\nkind = uniform\n",
    );
    let out = sohb(&["simulate", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = text(&out.stderr);
    assert!(err.contains("c3") && err.contains("cfl"), "{err}");

    let cfg = write_config(dir.path(), "[coefficients]\nc1 = 1\nc3 = 1\nspeed = 3\n");
    let out = sohb(&["simulate", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = text(&out.stderr);
    assert!(err.contains("line 4") && err.contains("speed"), "{err}");
}

#[test]
fn runtime_failure_names_time_and_cell() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[coefficients]\nc1 = 1\nc2 = 1\nc3 = 5\nc4 = 0\n\
         [grid]\nn = 2\ncells = 32\n\
         [scheme]\nscheme = direct_smooth\ncfl = 1\nt_end = 0.5\n\
         [initial]\nkind = density_pulse\namplitude = -0.999\nwidth = 0.1\n\
         [output]\ndir = out\n",
    );
    let out = sohb(&["simulate", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = text(&out.stderr);
    assert!(err.contains("runtime error at t = ") && err.contains("in cell") && err.contains("density"), "{err}");
    assert!(dir.path().join("out/snapshot_00000.csv").exists());
}

#[test]
fn simulate_writes_raw_snapshots_and_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[coefficients]\nc1 = 1\nc2 = 0.8\nc3 = 1\nc4 = 0.2\n\
         [grid]\nn = 3\ncells = 6, 5, 4\n\
         [scheme]\nt_end = 0.05\nsnapshot_interval = 0.025\n\
         [initial]\nkind = manufactured\nseed = 3\n\
         [output]\ndir = out\nformat = raw_f64\n",
    );
    let out = sohb(&["simulate", &cfg], dir.path());
    assert!(out.status.success(), "{}", text(&out.stderr));
    let snap = read_raw_snapshot(fs::File::open(dir.path().join("out/snapshot_00002.bin")).unwrap()).unwrap();
    assert_eq!((snap.n, snap.cells.clone()), (3, vec![6, 5, 4]));
    assert_eq!(snap.m.len(), 9 * snap.rho.len());
    let diag = fs::read_to_string(dir.path().join("out/diagnostics.csv")).unwrap();
    let rows: Vec<&str> = diag.lines().collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[3].starts_with("0.05,2,"), "{diag}");
}

#[test]
fn reduce_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[coefficients]\nc1 = 1\nc2 = 0.8\nc3 = 1\nc4 = 0.2\n\
         [grid]\nn = 3\ncells = 16, 16, 4\n\
         [scheme]\nscheme = direct_smooth\nt_end = 0.02\n\
         [initial]\nkind = embedded_reduction\n\
         [output]\ndir = out\n",
    );
    let out = sohb(&["reduce", &cfg], dir.path());
    assert!(out.status.success(), "{}", text(&out.stderr));
    let report = fs::read_to_string(dir.path().join("out/reduction.csv")).unwrap();
    assert_eq!(report, text(&out.stdout));
    assert!(report.starts_with("t,drift_omega,drift_axes,l1_diff,linf_diff\n"));
    let last: Vec<f64> = report.lines().last().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert!((last[0] - 0.02).abs() < 1e-15);
    assert!(last[1] < 1e-10 && last[2] < 1e-10);

    let cfg = write_config(
        dir.path(),
        "[coefficients]\nc1 = 1\nc3 = 1\n[grid]\nn = 2\ncells = 8\n[initial]\nkind = uniform\n",
    );
    assert_eq!(sohb(&["reduce", &cfg], dir.path()).status.code(), Some(1));
}

#[test]
fn bad_thread_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_sohb"))
        .args(["relax", "--d0", "2", "--alpha", "1", "--t", "0"])
        .env("SOHB_THREADS", "zero")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("SOHB_THREADS"));
}
