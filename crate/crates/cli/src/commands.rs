//! The four subcommands: profile, evolve, sweep, analyze.

use crate::config::RawConfig;
use heliodrop_core::analysis::{
    assess_recession, center_of_mass, coherent_train_count, detect_peaks, mean_velocity,
    median_abs_wavenumber, mirror, norm, phase_roughness, profile_distance, tail_region,
    AnalysisError,
};
use heliodrop_core::dynamics::{
    evolve, EvolutionConfig, EvolveError, Mode, Trajectory, WaveField,
};
use heliodrop_core::functional::{
    bulk_density, energy_per_area, hydrodynamic_energy_per_area, FunctionalParams,
};
use heliodrop_core::io::{
    fmt_g17, read_snapshot_csv, write_conservation_csv, write_profile_csv, write_snapshot_csv,
    Metadata,
};
use heliodrop_core::stationary::{solve_profile, DensityProfile, ProfileError};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const VERSION_STRING: &str = concat!("heliodrop-v", env!("CARGO_PKG_VERSION"));

/// Exit-code classes: 2 config, 3 solver, 4 conservation breach/divergence.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
    pub fn solver(message: impl Into<String>) -> Self {
        CliError {
            code: 3,
            message: message.into(),
        }
    }
    pub fn conservation(message: impl Into<String>) -> Self {
        CliError {
            code: 4,
            message: message.into(),
        }
    }
}

impl From<crate::config::ConfigError> for CliError {
    fn from(e: crate::config::ConfigError) -> Self {
        CliError::config(e.to_string())
    }
}

impl From<heliodrop_core::io::IoError> for CliError {
    fn from(e: heliodrop_core::io::IoError) -> Self {
        CliError::config(e.to_string())
    }
}

fn solve_configured_profile(
    cfg: &RawConfig,
) -> Result<(FunctionalParams, DensityProfile), CliError> {
    let params = cfg.functional_params()?;
    let rho0 = cfg.profile_rho0()?;
    let bulk = bulk_density(&params);
    if rho0 >= bulk {
        return Err(CliError::config(format!(
            "profile.rho0 = {rho0} must stay below the bulk density {bulk:.8} Å⁻³"
        )));
    }
    let profile = solve_profile(rho0, cfg.profile_dx()?, &params).map_err(|e| match e {
        ProfileError::CenterDensityOutOfRange { .. } => CliError::config(e.to_string()),
        other => CliError::solver(other.to_string()),
    })?;
    Ok((params, profile))
}

fn config_metadata(meta: &mut Metadata, cfg: &RawConfig, params: &FunctionalParams) {
    meta.push_str("version", VERSION_STRING);
    meta.push_num("functional.b", params.b);
    meta.push_num("functional.c", params.c);
    meta.push_num("functional.gamma", params.gamma);
    meta.push_num("functional.d", params.d);
    for (k, v) in cfg.resolved_entries() {
        meta.push_str(&format!("config.{k}"), &v);
    }
}

/// `heliodrop profile`: solve the stationary profile, write CSV +
/// metadata, print the observables.
pub fn run_profile(cfg: &RawConfig, out: &Path) -> Result<(), CliError> {
    let (params, profile) = solve_configured_profile(cfg)?;
    let default_name = format!("profile_rho{}", profile.rho0);
    let dir = out.join(cfg.run_name(&default_name));
    write_profile_csv(&dir.join("profile.csv"), &profile)?;
    let mut meta = Metadata::new();
    config_metadata(&mut meta, cfg, &params);
    meta.push_num("rho0", profile.rho0);
    meta.push_num("mu", profile.mu);
    meta.push_num("n_per_area", profile.n_per_area);
    meta.push_num("x_eff", profile.x_eff);
    meta.push_int("profile_points", profile.rho.len() as u64);
    meta.write(&dir.join("meta.json"))?;
    println!("mu = {:.6} K", profile.mu);
    println!("N = {:.6} A^-2", profile.n_per_area);
    println!("X_eff = {:.4} A", profile.x_eff);
    println!("written: {}", dir.display());
    Ok(())
}

/// Render a picosecond value compactly for file names.
fn fmt_ps(t_ps: f64) -> String {
    let mut s = format!("{t_ps:.10}");
    while s.ends_with('0') {
        s.pop();
    }
    if s.ends_with('.') {
        s.pop();
    }
    s
}

struct RunOutput {
    trajectory: Option<Trajectory>,
    outcome: String,
}

fn execute_run(
    cfg: &RawConfig,
    params: &FunctionalParams,
    profile: &DensityProfile,
    evo: &EvolutionConfig,
    dir: &Path,
) -> Result<RunOutput, CliError> {
    let grid = cfg.grid()?;
    write_profile_csv(&dir.join("profile.csv"), profile)?;
    let constants = &params.constants;

    let result = evolve(evo, profile, &grid, params);
    let mut meta = Metadata::new();
    config_metadata(&mut meta, cfg, params);
    meta.push_str("mode", evo.mode.as_str());
    meta.push_num("velocity_mps", evo.velocity_mps);
    meta.push_num("x0", evo.x0);
    meta.push_num("dt_seconds", evo.dt_seconds);
    meta.push_int("n_steps", evo.n_steps);
    meta.push_num("tolerance", evo.tolerance);
    meta.push_num("grid.x_min", grid.x_min);
    meta.push_num("grid.x_wall", grid.x_wall);
    meta.push_int("grid.n", grid.n as u64);
    meta.push_num("grid.dx", grid.dx);
    meta.push_num("profile.rho0", profile.rho0);
    meta.push_num("profile.mu", profile.mu);
    meta.push_num("profile.n_per_area", profile.n_per_area);
    meta.push_num("profile.x_eff", profile.x_eff);

    match result {
        Ok(trajectory) => {
            for snap in &trajectory.snapshots {
                let t_ps = snap.requested_seconds * 1e12;
                let stem = format!("snap_{}", fmt_ps(t_ps));
                write_snapshot_csv(&dir.join(format!("{stem}.csv")), &snap.field)?;
                let mut smeta = Metadata::new();
                smeta.push_str("version", VERSION_STRING);
                smeta.push_str("mode", snap.field.mode.as_str());
                smeta.push_num("requested_ps", t_ps);
                smeta.push_num("time_internal", snap.field.time);
                smeta.push_num(
                    "time_ps",
                    constants.internal_to_picoseconds(snap.field.time),
                );
                smeta.push_num("norm", norm(&snap.field));
                let energy = match snap.field.mode {
                    Mode::Quantum => energy_per_area(&snap.field, params),
                    Mode::Classical => hydrodynamic_energy_per_area(&snap.field, params),
                }
                .map_err(|e| CliError::solver(e.to_string()))?;
                smeta.push_num("energy", energy);
                smeta.push_num("x_eff", profile.x_eff);
                smeta.push_num("velocity_mps", evo.velocity_mps);
                smeta.push_num("grid.dx", grid.dx);
                smeta.write(&dir.join(format!("{stem}.meta.json")))?;
            }
            write_conservation_csv(
                &dir.join("conservation.csv"),
                &trajectory.conservation,
                constants,
            )?;
            let first = trajectory.conservation.first().unwrap();
            let last = trajectory.conservation.last().unwrap();
            meta.push_str("outcome", "completed");
            meta.push_num("norm_initial", first.norm);
            meta.push_num("norm_final", last.norm);
            meta.push_num("norm_drift", last.norm / first.norm - 1.0);
            meta.push_num("energy_initial", first.energy);
            meta.push_num("energy_final", last.energy);
            meta.push_num("energy_drift", last.energy / first.energy - 1.0);
            for (i, w) in trajectory.warnings.iter().enumerate() {
                meta.push_str(&format!("warning.{i}"), w);
            }
            meta.write(&dir.join("meta.json"))?;
            Ok(RunOutput {
                trajectory: Some(trajectory),
                outcome: "completed".into(),
            })
        }
        Err(EvolveError::ConservationBreach {
            quantity,
            step,
            drift,
            tolerance,
            log,
        }) => {
            write_conservation_csv(&dir.join("conservation.csv"), &log, constants)?;
            let outcome = format!(
                "conservation breach: {quantity} drift {drift:+.3e} at step {step} (tolerance {tolerance:.1e})"
            );
            meta.push_str("outcome", &outcome);
            meta.write(&dir.join("meta.json"))?;
            Ok(RunOutput {
                trajectory: None,
                outcome,
            })
        }
        Err(EvolveError::StepDiverged { step, log }) => {
            write_conservation_csv(&dir.join("conservation.csv"), &log, constants)?;
            let outcome = format!("step diverged: non-finite field at step {step}");
            meta.push_str("outcome", &outcome);
            meta.write(&dir.join("meta.json"))?;
            Ok(RunOutput {
                trajectory: None,
                outcome,
            })
        }
        Err(e @ EvolveError::ProfileClipped { .. }) => Err(CliError::config(e.to_string())),
        Err(e @ EvolveError::InvalidConfig(_)) => Err(CliError::config(e.to_string())),
        Err(e) => Err(CliError::solver(e.to_string())),
    }
}

/// `heliodrop evolve`: one full run with snapshots and the conservation
/// log; exits 4 on breach or divergence (log flushed first).
pub fn run_evolve(cfg: &RawConfig, out: &Path) -> Result<(), CliError> {
    let (params, profile) = solve_configured_profile(cfg)?;
    let evo = cfg.evolution()?;
    let default_name = format!("{}_v{}", evo.mode.as_str(), evo.velocity_mps);
    let dir = out.join(cfg.run_name(&default_name));
    let run = execute_run(cfg, &params, &profile, &evo, &dir)?;
    match run.trajectory {
        Some(traj) => {
            let last = traj.conservation.last().unwrap();
            let first = traj.conservation.first().unwrap();
            println!(
                "completed {} steps: |dN/N| = {:.3e}, |dE/E| = {:.3e}",
                last.step,
                (last.norm / first.norm - 1.0).abs(),
                (last.energy / first.energy - 1.0).abs()
            );
            for w in &traj.warnings {
                eprintln!("warning: {w}");
            }
            println!("written: {}", dir.display());
            Ok(())
        }
        None => Err(CliError::conservation(run.outcome)),
    }
}

/// `heliodrop sweep`: one evolve run per velocity, fanned out over a
/// worker pool, plus a summary CSV.
pub fn run_sweep(cfg: &RawConfig, out: &Path, jobs: Option<usize>) -> Result<(), CliError> {
    let velocities = cfg.sweep_velocities()?;
    if velocities.is_empty() {
        return Err(CliError::config(
            "sweep.velocities_mps is empty; nothing to run",
        ));
    }
    let (params, profile) = solve_configured_profile(cfg)?;
    let base_evo = cfg.evolution()?;
    let min_prominence = cfg.min_prominence()?;

    // deterministic directory names; duplicates get distinct suffixes
    let mut names = Vec::with_capacity(velocities.len());
    for (i, v) in velocities.iter().enumerate() {
        let base = format!("v{}_{}", v, base_evo.mode.as_str());
        let dups = velocities[..i].iter().filter(|&&u| u == *v).count();
        names.push(if dups == 0 {
            base
        } else {
            format!("{base}_{}", dups + 1)
        });
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or_else(num_cpus))
        .build()
        .map_err(|e| CliError::config(format!("worker pool: {e}")))?;

    struct SweepRow {
        velocity: f64,
        name: String,
        status: String,
        distance: Option<f64>,
        peaks: Option<usize>,
    }

    let rows: Vec<SweepRow> = pool.install(|| {
        use rayon::prelude::*;
        velocities
            .par_iter()
            .zip(names.par_iter())
            .map(|(&velocity, name)| {
                let evo = EvolutionConfig {
                    velocity_mps: velocity,
                    ..base_evo.clone()
                };
                let dir = out.join(name);
                match execute_run(cfg, &params, &profile, &evo, &dir) {
                    Ok(run) => match run.trajectory {
                        Some(traj) => {
                            let stats = cfg
                                .grid()
                                .map_err(|e| e.to_string())
                                .and_then(|grid| {
                                    heliodrop_core::dynamics::initialize(
                                        &profile,
                                        evo.velocity_mps,
                                        evo.x0,
                                        &grid,
                                        evo.mode,
                                        &params,
                                    )
                                    .map_err(|e| e.to_string())
                                })
                                .and_then(|initial| {
                                    sweep_stats(&traj, &initial, &profile, min_prominence)
                                        .map_err(|e| e.to_string())
                                });
                            SweepRow {
                                velocity,
                                name: name.clone(),
                                status: "ok".into(),
                                distance: stats.as_ref().map(|s| s.0).ok(),
                                peaks: stats.map(|s| s.1).ok(),
                            }
                        }
                        None => SweepRow {
                            velocity,
                            name: name.clone(),
                            status: run.outcome,
                            distance: None,
                            peaks: None,
                        },
                    },
                    Err(e) => SweepRow {
                        velocity,
                        name: name.clone(),
                        status: e.message,
                        distance: None,
                        peaks: None,
                    },
                }
            })
            .collect()
    });

    let mut s = String::from("velocity_mps,run_dir,elastic_distance,tail_peak_count,status\n");
    for r in &rows {
        let _ = writeln!(
            s,
            "{},{},{},{},\"{}\"",
            r.velocity,
            r.name,
            r.distance.map(fmt_g17).unwrap_or_default(),
            r.peaks.map(|p| p.to_string()).unwrap_or_default(),
            r.status.replace('"', "'")
        );
    }
    std::fs::create_dir_all(out).map_err(|e| CliError::config(e.to_string()))?;
    std::fs::write(out.join("summary.csv"), s).map_err(|e| CliError::config(e.to_string()))?;

    let failed: Vec<&SweepRow> = rows.iter().filter(|r| r.status != "ok").collect();
    println!(
        "sweep: {}/{} runs succeeded; summary at {}",
        rows.len() - failed.len(),
        rows.len(),
        out.join("summary.csv").display()
    );
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::conservation(format!(
            "{} of {} sweep runs failed",
            failed.len(),
            rows.len()
        )))
    }
}

fn num_cpus() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

/// Elastic-distance metric (post-run |ψ| vs the mirrored initial |ψ|,
/// best-shift aligned) and the tail peak count of the final state.
fn sweep_stats(
    traj: &Trajectory,
    initial: &WaveField,
    profile: &DensityProfile,
    min_prominence: f64,
) -> Result<(f64, usize), AnalysisError> {
    let final_field = &traj.final_field;
    let d = profile_distance(final_field, &mirror(initial), true)?;
    let region = tail_region(final_field, profile.x_eff)?;
    let report = detect_peaks(final_field, region, min_prominence);
    Ok((d.value, report.peak_count))
}

fn json_number(text: &str, key: &str) -> Option<f64> {
    let pat = format!("\"{key}\":");
    let at = text.find(&pat)? + pat.len();
    let rest = text[at..].trim_start();
    let end = rest
        .find(|c: char| c == ',' || c == '\n' || c == '}')
        .unwrap_or(rest.len());
    rest[..end].trim().parse().ok()
}

/// `heliodrop analyze`: tail report, norms, and phase-coherence summary
/// for one or more snapshot files; with two or more, recession metrics
/// between the first and last.
pub fn run_analyze(
    paths: &[PathBuf],
    cfg: &RawConfig,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let params = cfg.functional_params()?;
    let constants = &params.constants;
    let min_prominence = cfg.min_prominence()?;
    let mut fields = Vec::new();
    for path in paths {
        let mut field = read_snapshot_csv(path, Mode::Quantum)
            .map_err(|e| CliError::config(e.to_string()))?;
        let sidecar = path.with_extension("meta.json");
        let mut x_eff = cfg.analysis_x_eff()?;
        if let Ok(text) = std::fs::read_to_string(&sidecar) {
            if let Some(t) = json_number(&text, "time_internal") {
                field.time = t;
            }
            if x_eff.is_none() {
                x_eff = json_number(&text, "x_eff");
            }
            if text.contains("\"mode\": \"classical\"") {
                field.mode = Mode::Classical;
            }
        }
        // fallback: width of the equivalent flat slab of the snapshot itself
        let x_eff = match x_eff {
            Some(v) => v,
            None => {
                let peak = field
                    .values
                    .iter()
                    .map(|v| v.norm_sqr())
                    .fold(0.0f64, f64::max);
                if peak > 0.0 {
                    norm(&field) / peak
                } else {
                    return Err(CliError::config(format!(
                        "{}: empty field and no x_eff available",
                        path.display()
                    )));
                }
            }
        };
        fields.push((path.clone(), field, x_eff));
    }

    let mut meta = Metadata::new();
    meta.push_str("version", VERSION_STRING);
    meta.push_num("min_prominence", min_prominence);
    for (i, (path, field, x_eff)) in fields.iter().enumerate() {
        let p = format!("snapshot.{i}");
        meta.push_str(&format!("{p}.file"), &path.display().to_string());
        meta.push_str(&format!("{p}.mode"), field.mode.as_str());
        meta.push_num(&format!("{p}.time_ps"), constants.internal_to_picoseconds(field.time));
        meta.push_num(&format!("{p}.norm"), norm(field));
        let com = center_of_mass(field).map_err(|e| CliError::config(e.to_string()))?;
        meta.push_num(&format!("{p}.center_of_mass"), com);
        meta.push_num(&format!("{p}.x_eff"), *x_eff);
        let region = tail_region(field, *x_eff).map_err(|e| CliError::config(e.to_string()))?;
        meta.push_num(&format!("{p}.tail.x_lo"), region.0);
        meta.push_num(&format!("{p}.tail.x_hi"), region.1);
        let report = detect_peaks(field, region, min_prominence);
        meta.push_int(&format!("{p}.tail.peak_count"), report.peak_count as u64);
        meta.push_int(
            &format!("{p}.tail.coherent_peak_count"),
            coherent_train_count(&report, field) as u64,
        );
        meta.push_list(&format!("{p}.tail.peak_positions"), &report.peak_positions);
        meta.push_list(&format!("{p}.tail.peak_heights"), &report.peak_heights);
        meta.push_list(
            &format!("{p}.tail.peak_prominences"),
            &report.peak_prominences,
        );
        meta.push_num(&format!("{p}.tail.mean_spacing"), report.mean_spacing);
        // phase coherence: bulk strip and the strip just behind the drop
        let bulk = (com - 0.5 * x_eff, com + 0.5 * x_eff);
        match median_abs_wavenumber(field, bulk) {
            Ok(k) => meta.push_num(&format!("{p}.phase.bulk_median_k"), k),
            Err(_) => meta.push_str(&format!("{p}.phase.bulk_median_k"), "phase-gap"),
        }
        let tail_strip = (com - 3.0 * x_eff, com - x_eff);
        match median_abs_wavenumber(field, tail_strip) {
            Ok(k) => meta.push_num(&format!("{p}.phase.tail_median_k"), k),
            Err(_) => meta.push_str(&format!("{p}.phase.tail_median_k"), "phase-gap"),
        }
        match phase_roughness(field, tail_strip) {
            Ok(r) => meta.push_num(&format!("{p}.phase.tail_roughness"), r),
            Err(_) => meta.push_str(&format!("{p}.phase.tail_roughness"), "phase-gap"),
        }
    }

    if fields.len() >= 2 {
        let (_, early, _) = &fields[0];
        let (_, late, x_eff) = &fields[fields.len() - 1];
        let report = assess_recession(early, late, *x_eff, min_prominence)
            .map_err(|e| CliError::config(e.to_string()))?;
        meta.push_str(
            "recession.flag",
            if report.recession_flag { "true" } else { "false" },
        );
        let v = mean_velocity(early, late, constants)
            .map_err(|e| CliError::config(e.to_string()))?;
        meta.push_num("recession.mean_velocity_mps", v);
    }

    let rendered = meta.render();
    print!("{rendered}");
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| CliError::config(e.to_string()))?;
        std::fs::write(dir.join("analysis.json"), rendered)
            .map_err(|e| CliError::config(e.to_string()))?;
    }
    Ok(())
}
