//! Deterministic file formats: profile CSV, snapshot CSV, conservation
//! log, and JSON metadata sidecars.
//!
//! All floats render with 17 significant digits and no file carries a
//! timestamp, so identical inputs produce byte-identical outputs.

use crate::dynamics::{ConservationSample, Mode, WaveField};
use crate::grid::Grid;
use crate::stationary::DensityProfile;
use crate::units::PhysicalConstants;
use num_complex::Complex64;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{path}:{line}: {what}")]
    Malformed {
        path: String,
        line: usize,
        what: String,
    },
}

/// 17-significant-digit rendering used in every data file.
pub fn fmt_g17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write a profile as two-column CSV (x in Å, ρ in Å⁻³) behind a header
/// line carrying the scalar observables.
pub fn write_profile_csv(path: &Path, profile: &DensityProfile) -> Result<(), IoError> {
    let mut s = String::with_capacity(profile.rho.len() * 48 + 128);
    let _ = writeln!(
        s,
        "# rho0={} mu={} N={} x_eff={}",
        fmt_g17(profile.rho0),
        fmt_g17(profile.mu),
        fmt_g17(profile.n_per_area),
        fmt_g17(profile.x_eff)
    );
    for (i, &r) in profile.rho.iter().enumerate() {
        let _ = writeln!(s, "{},{}", fmt_g17(profile.grid.x(i)), fmt_g17(r));
    }
    write_atomic(path, s.as_bytes())
}

/// Write a snapshot as CSV with columns x, re_psi, im_psi, abs_psi, phase.
/// The phase column is the raw two-argument arctangent in (−π, π].
pub fn write_snapshot_csv(path: &Path, field: &WaveField) -> Result<(), IoError> {
    let mut s = String::with_capacity(field.values.len() * 100 + 64);
    s.push_str("x,re_psi,im_psi,abs_psi,phase\n");
    for (i, v) in field.values.iter().enumerate() {
        let mut phase = v.im.atan2(v.re);
        if phase == -std::f64::consts::PI {
            phase = std::f64::consts::PI;
        }
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            fmt_g17(field.grid.x(i)),
            fmt_g17(v.re),
            fmt_g17(v.im),
            fmt_g17(v.norm()),
            fmt_g17(phase)
        );
    }
    write_atomic(path, s.as_bytes())
}

/// Read a snapshot CSV back into a wave field. The time stamp is taken
/// from the caller (snapshot files record it in their metadata sidecar);
/// absent that, 0.
pub fn read_snapshot_csv(path: &Path, mode: Mode) -> Result<WaveField, IoError> {
    let text = fs::read_to_string(path)?;
    let name = path.display().to_string();
    let mut xs = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 && line.starts_with('x') {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let mut next = |what: &str| -> Result<f64, IoError> {
            cols.next()
                .ok_or_else(|| IoError::Malformed {
                    path: name.clone(),
                    line: lineno + 1,
                    what: format!("missing column {what}"),
                })?
                .trim()
                .parse::<f64>()
                .map_err(|e| IoError::Malformed {
                    path: name.clone(),
                    line: lineno + 1,
                    what: format!("bad {what}: {e}"),
                })
        };
        xs.push(next("x")?);
        let re = next("re_psi")?;
        let im = next("im_psi")?;
        values.push(Complex64::new(re, im));
    }
    if xs.len() < 16 {
        return Err(IoError::Malformed {
            path: name,
            line: 0,
            what: format!("snapshot has only {} rows", xs.len()),
        });
    }
    let dx = xs[1] - xs[0];
    for w in xs.windows(2) {
        if ((w[1] - w[0]) - dx).abs() > 1e-9 * dx.abs().max(1.0) {
            return Err(IoError::Malformed {
                path: name,
                line: 0,
                what: "grid spacing is not uniform".into(),
            });
        }
    }
    let grid = Grid::new(xs[0], *xs.last().unwrap(), xs.len()).map_err(|e| IoError::Malformed {
        path: name,
        line: 0,
        what: e.to_string(),
    })?;
    Ok(WaveField {
        grid,
        values,
        time: 0.0,
        mode,
    })
}

/// Write the conservation log: step, time in ps, norm, energy.
pub fn write_conservation_csv(
    path: &Path,
    samples: &[ConservationSample],
    constants: &PhysicalConstants,
) -> Result<(), IoError> {
    let mut s = String::with_capacity(samples.len() * 72 + 32);
    s.push_str("step,time_ps,norm,energy\n");
    for row in samples {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            row.step,
            fmt_g17(constants.internal_to_picoseconds(row.time_internal)),
            fmt_g17(row.norm),
            fmt_g17(row.energy)
        );
    }
    write_atomic(path, s.as_bytes())
}

/// Ordered key-value JSON document; values are rendered deterministically.
#[derive(Debug, Default, Clone)]
pub struct Metadata {
    entries: Vec<(String, String)>,
}

impl Metadata {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_str(&mut self, key: &str, value: &str) {
        self.entries
            .push((key.to_string(), format!("\"{}\"", escape_json(value))));
    }

    pub fn push_num(&mut self, key: &str, value: f64) {
        self.entries.push((key.to_string(), fmt_g17(value)));
    }

    pub fn push_int(&mut self, key: &str, value: u64) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn push_list(&mut self, key: &str, values: &[f64]) {
        let body: Vec<String> = values.iter().map(|&v| fmt_g17(v)).collect();
        self.entries
            .push((key.to_string(), format!("[{}]", body.join(", "))));
    }

    pub fn render(&self) -> String {
        let mut s = String::from("{\n");
        for (i, (k, v)) in self.entries.iter().enumerate() {
            let comma = if i + 1 < self.entries.len() { "," } else { "" };
            let _ = writeln!(s, "  \"{}\": {}{}", escape_json(k), v, comma);
        }
        s.push_str("}\n");
        s
    }

    pub fn write(&self, path: &Path) -> Result<(), IoError> {
        write_atomic(path, self.render().as_bytes())
    }
}

fn escape_json(s: &str) -> String {
    s.chars()
        .flat_map(|c| match c {
            '"' => vec!['\\', '"'],
            '\\' => vec!['\\', '\\'],
            '\n' => vec!['\\', 'n'],
            c => vec![c],
        })
        .collect()
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut f = fs::File::create(path)?;
    f.write_all(bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::FunctionalParams;
    use crate::stationary::solve_profile;
    use approx::assert_relative_eq;

    #[test]
    fn profile_csv_round_trips_header_values() {
        let p = FunctionalParams::helium4();
        let prof = solve_profile(0.02, 0.1, &p).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("profile.csv");
        write_profile_csv(&path, &prof).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let header = text.lines().next().unwrap();
        assert!(header.starts_with("# rho0="));
        assert!(header.contains("x_eff="));
        // 17-digit rendering parses back exactly
        let n_str = header
            .split("N=")
            .nth(1)
            .unwrap()
            .split_whitespace()
            .next()
            .unwrap();
        assert_eq!(n_str.parse::<f64>().unwrap(), prof.n_per_area);
        assert_eq!(text.lines().count(), 1 + prof.rho.len());
    }

    #[test]
    fn snapshot_csv_round_trips_field() {
        let p = FunctionalParams::helium4();
        let prof = solve_profile(0.02, 0.1, &p).unwrap();
        let grid = crate::grid::Grid::from_spacing(0.0, 150.0, 0.2).unwrap();
        let psi =
            crate::dynamics::initialize(&prof, 65.78, 100.0, &grid, Mode::Quantum, &p).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.csv");
        write_snapshot_csv(&path, &psi).unwrap();
        let back = read_snapshot_csv(&path, Mode::Quantum).unwrap();
        assert_eq!(back.grid.n, psi.grid.n);
        assert_relative_eq!(back.grid.dx, psi.grid.dx, epsilon = 1e-12);
        for (a, b) in back.values.iter().zip(&psi.values) {
            assert_eq!(a, b, "17-digit rendering must round-trip bit-exactly");
        }
    }

    #[test]
    fn snapshot_reader_rejects_malformed_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "x,re_psi,im_psi,abs_psi,phase\n1,2\n").unwrap();
        assert!(read_snapshot_csv(&path, Mode::Quantum).is_err());
        std::fs::write(&path, "not,a,snapshot\n").unwrap();
        assert!(read_snapshot_csv(&path, Mode::Quantum).is_err());
    }

    #[test]
    fn metadata_renders_deterministic_json() {
        let mut m = Metadata::new();
        m.push_str("mode", "quantum");
        m.push_num("rho0", 0.02183599);
        m.push_int("n_steps", 608000);
        m.push_list("snapshot_ps", &[15.2, 30.4]);
        let a = m.render();
        let b = m.render();
        assert_eq!(a, b);
        assert!(a.starts_with("{\n"));
        assert!(a.contains("\"mode\": \"quantum\""));
        assert!(a.contains("\"rho0\": 2.1835990000000000e-2"));
        assert!(a.trim_end().ends_with('}'));
    }
}
