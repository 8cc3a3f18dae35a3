//! Flat key–value run configuration with dotted sections.
//!
//! Parsing is strict: any key outside the known set aborts before any
//! computation. Laboratory units (m/s, ps) are converted exactly once,
//! when the typed config is built.

use heliodrop_core::dynamics::{EvolutionConfig, Mode, DEFAULT_TOLERANCE};
use heliodrop_core::functional::FunctionalParams;
use heliodrop_core::grid::Grid;
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

const KNOWN_KEYS: &[&str] = &[
    "functional.b",
    "functional.c",
    "functional.gamma",
    "functional.d",
    "profile.rho0",
    "profile.dx",
    "grid.x_min",
    "grid.x_wall",
    "grid.dx",
    "evolve.velocity_mps",
    "evolve.x0",
    "evolve.dt_seconds",
    "evolve.duration_ps",
    "evolve.snapshot_ps",
    "evolve.tolerance",
    "evolve.mode",
    "sweep.velocities_mps",
    "analysis.min_prominence",
    "analysis.x_eff",
    "run.name",
];

/// Raw assignments plus typed accessors. Defaults reproduce the reference
/// scattering setup: the thick drop at 110 Å boosted at 65.78 m/s against
/// a wall at 150 Å.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str, source: &str) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError(format!(
                    "{source}:{}: expected 'key = value', got '{line}'",
                    lineno + 1
                )));
            };
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(ConfigError(format!(
                    "{source}:{}: unknown key '{key}'",
                    lineno + 1
                )));
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(RawConfig { values })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Apply one `--set key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let Some((key, value)) = assignment.split_once('=') else {
            return Err(ConfigError(format!(
                "--set expects key=value, got '{assignment}'"
            )));
        };
        let key = key.trim();
        if !KNOWN_KEYS.contains(&key) {
            return Err(ConfigError(format!("unknown key '{key}' in --set")));
        }
        self.values.insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.values.get(key) {
            None => Ok(default),
            Some(raw) => raw
                .parse::<f64>()
                .map_err(|e| ConfigError(format!("{key}: bad number '{raw}': {e}"))),
        }
    }

    fn f64_list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        match self.values.get(key) {
            None => Ok(Vec::new()),
            Some(raw) if raw.trim().is_empty() => Ok(Vec::new()),
            Some(raw) => raw
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| ConfigError(format!("{key}: bad number '{s}': {e}")))
                })
                .collect(),
        }
    }

    pub fn string(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn functional_params(&self) -> Result<FunctionalParams, ConfigError> {
        let defaults = FunctionalParams::helium4();
        let params = FunctionalParams {
            b: self.f64_or("functional.b", defaults.b)?,
            c: self.f64_or("functional.c", defaults.c)?,
            gamma: self.f64_or("functional.gamma", defaults.gamma)?,
            d: self.f64_or("functional.d", defaults.d)?,
            constants: defaults.constants,
        };
        params.validate().map_err(ConfigError)?;
        Ok(params)
    }

    pub fn profile_rho0(&self) -> Result<f64, ConfigError> {
        let v = self.f64_or("profile.rho0", 0.02183599)?;
        if !(v > 0.0) {
            return Err(ConfigError(format!("profile.rho0 must be positive, got {v}")));
        }
        Ok(v)
    }

    pub fn profile_dx(&self) -> Result<f64, ConfigError> {
        let v = self.f64_or("profile.dx", 0.05)?;
        if !(v > 0.0) {
            return Err(ConfigError(format!("profile.dx must be positive, got {v}")));
        }
        Ok(v)
    }

    pub fn grid(&self) -> Result<Grid, ConfigError> {
        let x_min = self.f64_or("grid.x_min", -250.0)?;
        let x_wall = self.f64_or("grid.x_wall", 150.0)?;
        let dx = self.f64_or("grid.dx", 0.1)?;
        Grid::from_spacing(x_min, x_wall, dx).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn evolution(&self) -> Result<EvolutionConfig, ConfigError> {
        let velocity_mps = self.f64_or("evolve.velocity_mps", 65.78)?;
        let x0 = self.f64_or("evolve.x0", 110.0)?;
        let dt_seconds = self.f64_or("evolve.dt_seconds", 1e-17)?;
        let duration_ps = self.f64_or("evolve.duration_ps", 60.8)?;
        let snapshot_ps = {
            let explicit = self.f64_list("evolve.snapshot_ps")?;
            if self.values.contains_key("evolve.snapshot_ps") {
                explicit
            } else {
                vec![15.2, 30.4, 45.6, 60.8]
            }
        };
        let tolerance = self.f64_or("evolve.tolerance", DEFAULT_TOLERANCE)?;
        let mode: Mode = self
            .string("evolve.mode")
            .unwrap_or("quantum")
            .parse()
            .map_err(ConfigError)?;
        if !(dt_seconds > 0.0) {
            return Err(ConfigError(format!(
                "evolve.dt_seconds must be positive, got {dt_seconds}"
            )));
        }
        if !(duration_ps > 0.0) {
            return Err(ConfigError(format!(
                "evolve.duration_ps must be positive, got {duration_ps}"
            )));
        }
        let n_steps = (duration_ps * 1e-12 / dt_seconds).round() as u64;
        let config = EvolutionConfig {
            velocity_mps,
            x0,
            dt_seconds,
            n_steps,
            snapshot_times_seconds: snapshot_ps.iter().map(|&t| t * 1e-12).collect(),
            tolerance,
            mode,
        };
        config.validate().map_err(|e| ConfigError(e.to_string()))?;
        Ok(config)
    }

    pub fn sweep_velocities(&self) -> Result<Vec<f64>, ConfigError> {
        self.f64_list("sweep.velocities_mps")
    }

    pub fn min_prominence(&self) -> Result<f64, ConfigError> {
        let v = self.f64_or(
            "analysis.min_prominence",
            heliodrop_core::analysis::DEFAULT_MIN_PROMINENCE,
        )?;
        if !(v > 0.0 && v < 1.0) {
            return Err(ConfigError(format!(
                "analysis.min_prominence must lie in (0, 1), got {v}"
            )));
        }
        Ok(v)
    }

    pub fn analysis_x_eff(&self) -> Result<Option<f64>, ConfigError> {
        match self.values.get("analysis.x_eff") {
            None => Ok(None),
            Some(_) => Ok(Some(self.f64_or("analysis.x_eff", 0.0)?)),
        }
    }

    pub fn run_name(&self, default: &str) -> String {
        self.string("run.name").unwrap_or(default).to_string()
    }

    /// Resolved key-value pairs for metadata, defaults included.
    pub fn resolved_entries(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for &key in KNOWN_KEYS {
            let value = match self.values.get(key) {
                Some(v) => v.clone(),
                None => continue,
            };
            out.push((key.to_string(), value));
        }
        out
    }
}
