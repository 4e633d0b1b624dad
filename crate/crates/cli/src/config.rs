//! Flat `key = value` experiment configuration.
//!
//! Values are resolved in order: built-in defaults, then the config file,
//! then command-line overrides. Every key remembers where it was last set so
//! validation errors can point at the offending line or flag.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::Serialize;

use scflab_core::diagnostics::{RadialGridSpec, ScanSettings, Thresholds};
use scflab_core::phase_space::RadialSpacing;

/// Where a value came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Default,
    Line { file: String, line: usize },
    Flag(String),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Default => write!(f, "default"),
            Origin::Line { file, line } => write!(f, "{file}:{line}"),
            Origin::Flag(name) => write!(f, "{name}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{origin}: {message}")]
pub struct ConfigError {
    pub origin: Origin,
    pub message: String,
}

impl ConfigError {
    fn new(origin: Origin, message: impl Into<String>) -> Self {
        ConfigError { origin, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridConfig {
    /// Radial χ grid written by `simulate` and checked by `compare`.
    pub chi_extent: f64,
    pub chi_count: usize,
    pub chi_spacing: RadialSpacing,
    /// Radial χ grid used by `audit` and `sweep`.
    pub audit_chi_extent: f64,
    pub audit_chi_count: usize,
    pub audit_chi_spacing: RadialSpacing,
    /// Radial W grid used by `audit` and `sweep`.
    pub wigner_extent: f64,
    pub wigner_count: usize,
    pub wigner_spacing: RadialSpacing,
    /// Cartesian W grid written by `simulate`.
    pub cart_extent: f64,
    pub cart_spacing: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            chi_extent: 3.0,
            chi_count: 200,
            chi_spacing: RadialSpacing::ModulusSquared,
            audit_chi_extent: 3.0,
            audit_chi_count: 200,
            audit_chi_spacing: RadialSpacing::Modulus,
            wigner_extent: 2.0,
            wigner_count: 101,
            wigner_spacing: RadialSpacing::Modulus,
            cart_extent: 1.5,
            cart_spacing: 0.1,
        }
    }
}

pub const GRID_KEYS: &[&str] = &[
    "chi_extent",
    "chi_count",
    "chi_spacing",
    "audit_chi_extent",
    "audit_chi_count",
    "audit_chi_spacing",
    "wigner_extent",
    "wigner_count",
    "wigner_spacing",
    "cart_extent",
    "cart_spacing",
];

/// Horizon used when `t_end` is not set.
pub const DEFAULT_T_END: f64 = 10.0;
/// Sweep horizon when `t_end` is not set; long enough to catch the
/// weak-coupling onset, whose first minimum sits past t = 30.
pub const DEFAULT_SWEEP_T_END: f64 = 40.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    /// g/γ with γ = 1.
    pub ratio: f64,
    pub initial_fock: usize,
    pub n_cut: usize,
    pub t_end: Option<f64>,
    pub dt: f64,
    pub record_every: f64,
    /// Leading block of ρ written to trace.csv.
    pub trace_block: usize,
    /// Number of evenly spaced time slices in the field files.
    pub slices: usize,
    pub grids: GridConfig,
    pub choi_n_cut: Option<usize>,
    pub tolerance: f64,
    pub ratios: Vec<f64>,
    /// Sweep worker threads; 0 uses one per core.
    pub workers: usize,
    pub thresholds: Thresholds,
    #[serde(skip)]
    origins: BTreeMap<String, Origin>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            ratio: 1.0,
            initial_fock: 1,
            n_cut: 40,
            t_end: None,
            dt: 1e-3,
            record_every: 1e-2,
            trace_block: 2,
            slices: 6,
            grids: GridConfig::default(),
            choi_n_cut: Some(8),
            tolerance: 1e-5,
            ratios: parse_ratios("0.1:3.0:0.1").expect("valid default"),
            workers: 0,
            thresholds: Thresholds::default(),
            origins: BTreeMap::new(),
        }
    }
}

fn parse_f64(value: &str) -> Result<f64, String> {
    let v: f64 = value.parse().map_err(|_| format!("expected a number, got `{value}`"))?;
    if !v.is_finite() {
        return Err(format!("expected a finite number, got `{value}`"));
    }
    Ok(v)
}

fn parse_usize(value: &str) -> Result<usize, String> {
    value.parse().map_err(|_| format!("expected a nonnegative integer, got `{value}`"))
}

fn parse_spacing(value: &str) -> Result<RadialSpacing, String> {
    match value {
        "modulus" => Ok(RadialSpacing::Modulus),
        "modulus_squared" => Ok(RadialSpacing::ModulusSquared),
        other => Err(format!("expected `modulus` or `modulus_squared`, got `{other}`")),
    }
}

fn round_grid(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

/// `start:stop:step` (inclusive) or a comma-separated list.
pub fn parse_ratios(value: &str) -> Result<Vec<f64>, String> {
    let value = value.trim();
    if value.contains(':') {
        let parts: Vec<&str> = value.split(':').map(str::trim).collect();
        let [start, stop, step] = parts.as_slice() else {
            return Err(format!("expected start:stop:step, got `{value}`"));
        };
        let (start, stop, step) = (parse_f64(start)?, parse_f64(stop)?, parse_f64(step)?);
        if step <= 0.0 || stop < start {
            return Err(format!("range `{value}` needs step > 0 and stop >= start"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        return Ok((0..count).map(|i| round_grid(start + step * i as f64)).collect());
    }
    let list = value
        .split(',')
        .map(|s| parse_f64(s.trim()))
        .collect::<Result<Vec<f64>, String>>()?;
    if list.is_empty() {
        return Err("empty ratio list".into());
    }
    Ok(list)
}

impl ExperimentConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str, origin: Origin) -> Result<(), ConfigError> {
        let err = |m: String| ConfigError::new(origin.clone(), format!("{key}: {m}"));
        let g = &mut self.grids;
        match key {
            "ratio" => self.ratio = parse_f64(value).map_err(err)?,
            "initial_fock" => self.initial_fock = parse_usize(value).map_err(err)?,
            "n_cut" => self.n_cut = parse_usize(value).map_err(err)?,
            "t_end" => self.t_end = Some(parse_f64(value).map_err(err)?),
            "dt" => self.dt = parse_f64(value).map_err(err)?,
            "record_every" => self.record_every = parse_f64(value).map_err(err)?,
            "trace_block" => self.trace_block = parse_usize(value).map_err(err)?,
            "slices" => self.slices = parse_usize(value).map_err(err)?,
            "choi_n_cut" => {
                self.choi_n_cut = match value {
                    "none" | "0" => None,
                    v => Some(parse_usize(v).map_err(err)?),
                }
            }
            "tolerance" => self.tolerance = parse_f64(value).map_err(err)?,
            "ratios" => self.ratios = parse_ratios(value).map_err(err)?,
            "workers" => self.workers = parse_usize(value).map_err(err)?,
            "eigen_tol" => self.thresholds.eigen = parse_f64(value).map_err(err)?,
            "chi_tol" => self.thresholds.chi = parse_f64(value).map_err(err)?,
            "wigner_tol" => self.thresholds.wigner = parse_f64(value).map_err(err)?,
            "refine_tol" => self.thresholds.refine = parse_f64(value).map_err(err)?,
            "chi_extent" => g.chi_extent = parse_f64(value).map_err(err)?,
            "chi_count" => g.chi_count = parse_usize(value).map_err(err)?,
            "chi_spacing" => g.chi_spacing = parse_spacing(value).map_err(err)?,
            "audit_chi_extent" => g.audit_chi_extent = parse_f64(value).map_err(err)?,
            "audit_chi_count" => g.audit_chi_count = parse_usize(value).map_err(err)?,
            "audit_chi_spacing" => g.audit_chi_spacing = parse_spacing(value).map_err(err)?,
            "wigner_extent" => g.wigner_extent = parse_f64(value).map_err(err)?,
            "wigner_count" => g.wigner_count = parse_usize(value).map_err(err)?,
            "wigner_spacing" => g.wigner_spacing = parse_spacing(value).map_err(err)?,
            "cart_extent" => g.cart_extent = parse_f64(value).map_err(err)?,
            "cart_spacing" => g.cart_spacing = parse_f64(value).map_err(err)?,
            _ => return Err(ConfigError::new(origin, format!("unknown key `{key}`"))),
        }
        self.origins.insert(key.to_string(), origin);
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, file: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let origin = Origin::Line { file: file.to_string(), line: i + 1 };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::new(origin, format!("expected `key = value`, got `{line}`")));
            };
            self.set(key.trim(), value.trim(), origin)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let name = path.display().to_string();
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new(Origin::Flag("--config".into()), format!("cannot read {name}: {e}")))?;
        self.apply_text(&text, &name)
    }

    /// Applies a comma-separated list of grid keys, as given to --grid-spec.
    pub fn apply_grid_spec(&mut self, spec: &str) -> Result<(), ConfigError> {
        let origin = Origin::Flag("--grid-spec".into());
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let Some((key, value)) = item.split_once('=') else {
                return Err(ConfigError::new(origin, format!("expected key=value, got `{item}`")));
            };
            let key = key.trim();
            if !GRID_KEYS.contains(&key) {
                return Err(ConfigError::new(origin, format!("`{key}` is not a grid key")));
            }
            self.set(key, value.trim(), origin.clone())?;
        }
        Ok(())
    }

    fn origin(&self, key: &str) -> Origin {
        self.origins.get(key).cloned().unwrap_or(Origin::Default)
    }

    /// A config error attributed to wherever `key` was set.
    pub fn error_at(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::new(self.origin(key), format!("{key}: {}", message.into()))
    }

    fn check(&self, ok: bool, key: &str, message: impl Into<String>) -> Result<(), ConfigError> {
        if ok {
            Ok(())
        } else {
            Err(self.error_at(key, message))
        }
    }

    /// Range and consistency checks, run once after all sources are applied.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.check(self.ratio >= 0.0, "ratio", "must be >= 0")?;
        self.check(self.n_cut >= 2, "n_cut", "must be >= 2")?;
        self.check(
            self.initial_fock < self.n_cut,
            "initial_fock",
            format!("must be below n_cut = {}", self.n_cut),
        )?;
        self.check(self.dt > 0.0, "dt", "must be > 0")?;
        if let Some(t) = self.t_end {
            self.check(t >= self.dt, "t_end", format!("must be >= dt = {}", self.dt))?;
        }
        self.check(self.record_every > 0.0, "record_every", "must be > 0")?;
        self.check(
            (1..=self.n_cut).contains(&self.trace_block),
            "trace_block",
            format!("must be in 1..={}", self.n_cut),
        )?;
        self.check(self.slices >= 1, "slices", "must be >= 1")?;
        if let Some(n) = self.choi_n_cut {
            self.check(n >= 2, "choi_n_cut", "must be >= 2 (or none)")?;
        }
        self.check(self.tolerance > 0.0, "tolerance", "must be > 0")?;
        self.check(self.ratios.iter().all(|&r| r >= 0.0), "ratios", "entries must be >= 0")?;
        for (key, v) in [
            ("eigen_tol", self.thresholds.eigen),
            ("chi_tol", self.thresholds.chi),
            ("wigner_tol", self.thresholds.wigner),
            ("refine_tol", self.thresholds.refine),
        ] {
            self.check(v > 0.0, key, "must be > 0")?;
        }
        let g = &self.grids;
        let guard = self.n_cut as f64 / 4.0;
        for (key, extent) in [("chi_extent", g.chi_extent), ("audit_chi_extent", g.audit_chi_extent)] {
            self.check(extent > 0.0, key, "must be > 0")?;
            self.check(
                extent * extent <= guard,
                key,
                format!("|xi|^2 up to {} exceeds the truncation guard n_cut/4 = {guard}", extent * extent),
            )?;
        }
        let wguard = self.n_cut as f64 / 8.0;
        for (key, extent) in [("wigner_extent", g.wigner_extent), ("cart_extent", g.cart_extent)] {
            self.check(extent > 0.0, key, "must be > 0")?;
        }
        self.check(
            g.wigner_extent * g.wigner_extent <= wguard,
            "wigner_extent",
            format!("|alpha|^2 exceeds the truncation guard n_cut/8 = {wguard}"),
        )?;
        self.check(
            2.0 * g.cart_extent * g.cart_extent <= wguard,
            "cart_extent",
            format!("grid corners exceed the truncation guard n_cut/8 = {wguard}"),
        )?;
        for (key, count) in [
            ("chi_count", g.chi_count),
            ("audit_chi_count", g.audit_chi_count),
            ("wigner_count", g.wigner_count),
        ] {
            self.check(count >= 2, key, "must be >= 2")?;
        }
        self.check(g.cart_spacing > 0.0, "cart_spacing", "must be > 0")?;
        Ok(())
    }

    pub fn horizon(&self, default: f64) -> f64 {
        self.t_end.unwrap_or(default)
    }

    pub fn chi_grid(&self) -> RadialGridSpec {
        let g = &self.grids;
        RadialGridSpec { extent: g.chi_extent, count: g.chi_count, spacing: g.chi_spacing }
    }

    pub fn scan_settings(&self, t_end: f64, choi: bool) -> ScanSettings {
        let g = &self.grids;
        ScanSettings {
            t_end,
            dt: self.dt,
            record_every: self.record_every,
            initial_fock: self.initial_fock,
            n_cut: self.n_cut,
            chi_grid: RadialGridSpec {
                extent: g.audit_chi_extent,
                count: g.audit_chi_count,
                spacing: g.audit_chi_spacing,
            },
            wigner_grid: RadialGridSpec {
                extent: g.wigner_extent,
                count: g.wigner_count,
                spacing: g.wigner_spacing,
            },
            choi_n_cut: if choi { self.choi_n_cut } else { None },
            thresholds: self.thresholds,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn file_values_and_comments() {
        let mut c = ExperimentConfig::default();
        c.apply_text("# run\nratio = 3\n\nn_cut=60  # larger\nchi_spacing = modulus\n", "run.cfg").unwrap();
        assert_eq!(c.ratio, 3.0);
        assert_eq!(c.n_cut, 60);
        assert_eq!(c.grids.chi_spacing, RadialSpacing::Modulus);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let mut c = ExperimentConfig::default();
        let e = c.apply_text("ratio = 1\ndt = fast\n", "run.cfg").unwrap_err();
        assert_eq!(e.origin, Origin::Line { file: "run.cfg".into(), line: 2 });
        assert!(e.to_string().starts_with("run.cfg:2: dt:"));
        let e = c.apply_text("\n\nbogus = 1\n", "run.cfg").unwrap_err();
        assert_eq!(e.to_string(), "run.cfg:3: unknown key `bogus`");
        let e = c.apply_text("ratio 1\n", "run.cfg").unwrap_err();
        assert!(e.to_string().starts_with("run.cfg:1:"));
    }

    #[test]
    fn validation_points_at_origin() {
        let mut c = ExperimentConfig::default();
        c.apply_text("n_cut = 10\ninitial_fock = 12\n", "a.cfg").unwrap();
        let e = c.validate().unwrap_err();
        assert_eq!(e.origin, Origin::Line { file: "a.cfg".into(), line: 2 });

        let mut c = ExperimentConfig::default();
        c.set("ratio", "-1", Origin::Flag("--ratio".into())).unwrap();
        assert!(c.validate().unwrap_err().to_string().starts_with("--ratio: ratio"));
    }

    #[test]
    fn grid_guards() {
        let mut c = ExperimentConfig::default();
        c.apply_grid_spec("chi_extent=4").unwrap();
        assert!(c.validate().is_err());
        assert!(c.apply_grid_spec("ratio=2").is_err());
        assert!(c.apply_grid_spec("chi_count").is_err());
    }

    #[test]
    fn ratio_ranges() {
        let r = parse_ratios("0.1:3.0:0.1").unwrap();
        assert_eq!(r.len(), 30);
        assert_eq!(r[2], 0.3);
        assert_eq!(r[29], 3.0);
        assert_eq!(parse_ratios("1, 2.5").unwrap(), vec![1.0, 2.5]);
        assert_eq!(parse_ratios("0.35:0.36:0.01").unwrap(), vec![0.35, 0.36]);
        assert!(parse_ratios("1:0:0.1").is_err());
        assert!(parse_ratios("a,b").is_err());
    }
}
