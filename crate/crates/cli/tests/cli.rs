//! End-to-end checks of the `heliodrop` binary: exit codes, file layout,
//! determinism, and the analyze pipeline.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn heliodrop() -> Command {
    Command::new(env!("CARGO_BIN_EXE_heliodrop"))
}

fn run(args: &[&str]) -> Output {
    heliodrop().args(args).output().expect("spawn heliodrop")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// A small, fast evolve setup: small drop, coarse grid, short run.
fn fast_evolve_args<'a>(out: &'a str, extra: &[&'a str]) -> Vec<String> {
    let mut args: Vec<String> = [
        "evolve",
        "--out",
        out,
        "--set",
        "profile.rho0=0.02",
        "--set",
        "grid.x_min=30",
        "--set",
        "grid.x_wall=150",
        "--set",
        "grid.dx=0.2",
        "--set",
        "evolve.x0=110",
        "--set",
        "evolve.velocity_mps=65.78",
        "--set",
        "evolve.dt_seconds=2e-16",
        "--set",
        "evolve.duration_ps=2.0",
        "--set",
        "evolve.snapshot_ps=1.0,2.0",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    args.extend(extra.iter().map(|s| s.to_string()));
    args
}

#[test]
fn profile_reports_paper_observables() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "profile",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("mu = -7.15"), "stdout: {text}");
    assert!(text.contains("N = 1.28"), "stdout: {text}");
    assert!(text.contains("X_eff = 58.9"), "stdout: {text}");
    let run_dir = dir.path().join("profile_rho0.02183599");
    assert!(run_dir.join("profile.csv").is_file());
    assert!(run_dir.join("meta.json").is_file());
}

#[test]
fn profile_small_drop_matches_reference() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "profile",
        "--set",
        "profile.rho0=0.02",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("N = 0.24"), "stdout: {text}");
    assert!(text.contains("X_eff = 12.2"), "stdout: {text}");
}

#[test]
fn profile_above_bulk_exits_2_naming_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "profile",
        "--set",
        "profile.rho0=0.03",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("0.021836"), "{}", stderr(&out));
}

#[test]
fn unknown_config_key_exits_2_before_computing() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "profile",
        "--set",
        "profile.rh0=0.02",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown key"));
    assert!(std::fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn config_file_parses_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "profile.rho0 = 0.03\n# comment\n").unwrap();
    // flag overrides the (invalid) file value
    let out = run(&[
        "profile",
        "--config",
        cfg.to_str().unwrap(),
        "--set",
        "profile.rho0=0.02",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn evolve_writes_layout_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let args = fast_evolve_args(out.to_str().unwrap(), &[]);
        let o = heliodrop().args(&args).output().unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let run_a = out_a.join("quantum_v65.78");
    let run_b = out_b.join("quantum_v65.78");
    for name in [
        "profile.csv",
        "snap_1.csv",
        "snap_2.csv",
        "snap_1.meta.json",
        "snap_2.meta.json",
        "conservation.csv",
        "meta.json",
    ] {
        let fa = std::fs::read(run_a.join(name)).unwrap_or_else(|_| panic!("missing {name}"));
        let fb = std::fs::read(run_b.join(name)).unwrap();
        assert_eq!(fa, fb, "{name} differs between identical runs");
    }
}

#[test]
fn evolve_oversized_dt_exits_4_with_log() {
    let dir = tempfile::tempdir().unwrap();
    let args = fast_evolve_args(
        dir.path().to_str().unwrap(),
        &["--set", "evolve.dt_seconds=1e-14", "--set", "evolve.duration_ps=10"],
    );
    let out = heliodrop().args(&args).output().unwrap();
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
    let run_dir = dir.path().join("quantum_v65.78");
    let log = std::fs::read_to_string(run_dir.join("conservation.csv")).unwrap();
    assert!(log.lines().count() >= 2, "log flushed before exit");
    let meta = std::fs::read_to_string(run_dir.join("meta.json")).unwrap();
    assert!(meta.contains("diverged") || meta.contains("breach"), "{meta}");
}

#[test]
fn classical_mode_records_mode_in_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let args = fast_evolve_args(
        dir.path().to_str().unwrap(),
        &["--set", "evolve.mode=classical"],
    );
    let out = heliodrop().args(&args).output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let run_dir = dir.path().join("classical_v65.78");
    let meta = std::fs::read_to_string(run_dir.join("meta.json")).unwrap();
    assert!(meta.contains("\"mode\": \"classical\""));
    for name in ["snap_1.csv", "snap_2.csv", "conservation.csv"] {
        assert!(run_dir.join(name).is_file(), "missing {name}");
    }
}

fn write_sweep_cfg(path: &Path, velocities: &str) {
    std::fs::write(
        path,
        format!(
            "profile.rho0 = 0.02\n\
             grid.x_min = 30\n\
             grid.x_wall = 150\n\
             grid.dx = 0.2\n\
             evolve.x0 = 110\n\
             evolve.dt_seconds = 2e-16\n\
             evolve.duration_ps = 1.0\n\
             evolve.snapshot_ps = 1.0\n\
             sweep.velocities_mps = {velocities}\n"
        ),
    )
    .unwrap();
}

#[test]
fn sweep_runs_each_velocity_and_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.cfg");
    write_sweep_cfg(&cfg, "30, 65.78");
    let out = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--jobs",
        "2",
        "--out",
        dir.path().join("s").to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let summary = std::fs::read_to_string(dir.path().join("s/summary.csv")).unwrap();
    assert!(summary.starts_with("velocity_mps,run_dir,elastic_distance,tail_peak_count,status"));
    assert_eq!(summary.lines().count(), 3);
    assert!(dir.path().join("s/v30_quantum/meta.json").is_file());
    assert!(dir.path().join("s/v65.78_quantum/meta.json").is_file());
}

#[test]
fn sweep_duplicate_velocities_get_distinct_directories() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.cfg");
    write_sweep_cfg(&cfg, "30, 30");
    let out = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("s").to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(dir.path().join("s/v30_quantum/meta.json").is_file());
    assert!(dir.path().join("s/v30_quantum_2/meta.json").is_file());
}

#[test]
fn sweep_empty_velocity_list_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["sweep", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn analyze_reports_peaks_and_recession() {
    let dir = tempfile::tempdir().unwrap();
    let args = fast_evolve_args(dir.path().to_str().unwrap(), &[]);
    let o = heliodrop().args(&args).output().unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let run_dir = dir.path().join("quantum_v65.78");
    let snap1: PathBuf = run_dir.join("snap_1.csv");
    let snap2: PathBuf = run_dir.join("snap_2.csv");
    let out = run(&[
        "analyze",
        snap1.to_str().unwrap(),
        snap2.to_str().unwrap(),
        "--out",
        dir.path().join("report").to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("\"snapshot.0.norm\""));
    assert!(text.contains("\"snapshot.1.tail.peak_count\""));
    assert!(text.contains("\"recession.flag\""));
    assert!(dir.path().join("report/analysis.json").is_file());

    // same file twice: recession velocity 0
    let out = run(&["analyze", snap1.to_str().unwrap(), snap1.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(
        text.contains("\"recession.mean_velocity_mps\": 0.0000000000000000e0"),
        "{text}"
    );
}

#[test]
fn analyze_malformed_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("junk.csv");
    std::fs::write(&bad, "this,is,not\na,snapshot,file\n").unwrap();
    let out = run(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
