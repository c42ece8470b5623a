//! Run configuration: defaults, figure presets, JSON config files and flag overrides.
//!
//! Layers apply in order: built-in defaults, preset, `--config` file, command-line flags.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use mbspec::dispersion::{BranchWindow, DispersionMode, EnergyWindow, SolverSettings};
use mbspec::{Regime, SystemConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const PRESETS: [&str; 9] = [
    "fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "converge", "table1",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(CliError::Config(format!(
                "unknown format '{other}' (csv|json)"
            ))),
        }
    }
}

/// `start:stop:step`, inclusive of `stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl KappaGrid {
    pub fn points(&self) -> CliResult<Vec<f64>> {
        let ok = self.start.is_finite() && self.stop.is_finite() && self.step.is_finite();
        if !ok || self.step <= 0.0 || self.stop < self.start {
            return Err(CliError::Config(format!(
                "empty κ grid {}:{}:{}",
                self.start, self.stop, self.step
            )));
        }
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..count)
            .map(|i| self.start + i as f64 * self.step)
            .collect())
    }
}

impl FromStr for KappaGrid {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, c] = parts.as_slice() else {
            return Err(CliError::Config(format!(
                "κ grid must be start:stop:step, got '{s}'"
            )));
        };
        Ok(KappaGrid {
            start: parse_phase(a)?,
            stop: parse_phase(b)?,
            step: parse_phase(c)?,
        })
    }
}

/// A number, optionally suffixed by `pi` (`2pi`, `0.5pi`, `pi`).
pub fn parse_phase(s: &str) -> CliResult<f64> {
    let t = s.trim();
    let bad = || CliError::Config(format!("cannot parse '{s}' as a number"));
    match t.strip_suffix("pi") {
        Some("") => Ok(PI),
        Some("-") => Ok(-PI),
        Some(m) => m.parse::<f64>().map(|x| x * PI).map_err(|_| bad()),
        None => t.parse::<f64>().map_err(|_| bad()),
    }
}

pub fn parse_window(s: &str) -> CliResult<EnergyWindow> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| CliError::Config(format!("energy window must be lo:hi, got '{s}'")))?;
    let w = EnergyWindow::new(parse_phase(a)?, parse_phase(b)?);
    if !w.is_valid() {
        return Err(CliError::Config(format!("empty energy window '{s}'")));
    }
    Ok(w)
}

pub fn parse_branches(s: &str) -> CliResult<BranchWindow> {
    let bad = || {
        CliError::Config(format!(
            "branch range must be n0:n1 with n0 <= n1, got '{s}'"
        ))
    };
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let min = a.trim().parse::<i64>().map_err(|_| bad())?;
    let max = b.trim().parse::<i64>().map_err(|_| bad())?;
    if max < min {
        return Err(bad());
    }
    Ok(BranchWindow { min, max })
}

pub fn parse_list<T: FromStr>(s: &str) -> CliResult<Vec<T>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim()
                .parse::<T>()
                .map_err(|_| CliError::Config(format!("cannot parse list item '{p}'")))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultichannelSweep {
    pub channels: Vec<u32>,
    /// Scatterer counts for the bounded rows.
    pub scatterers: Vec<u64>,
    /// Total length of the bounded arrays.
    pub length: f64,
    /// Wavenumbers for the bounded rows.
    pub k: Vec<f64>,
    /// `β` values for the unbounded rows.
    pub beta: Vec<f64>,
    /// Wavenumbers for the unbounded rows.
    pub beta_k: Vec<f64>,
}

impl Default for MultichannelSweep {
    fn default() -> Self {
        Self {
            channels: vec![1, 10],
            scatterers: vec![1_000_000],
            length: 1.0,
            k: vec![1e3],
            beta: vec![1.0],
            beta_k: vec![1e4],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Option<String>,
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "L")]
    pub l: f64,
    /// One run per value.
    pub c: Vec<f64>,
    pub regime: Regime,
    pub mode: DispersionMode,
    pub kappa_grid: KappaGrid,
    pub e_window: Option<EnergyWindow>,
    pub branches: Option<BranchWindow>,
    /// Tangent periods scanned when neither a window nor a branch range is given.
    pub default_branch_count: i64,
    pub max_roots: Option<usize>,
    pub settings: SolverSettings,
    /// Probe energy for the convergence table.
    pub energy: f64,
    pub n_list: Vec<usize>,
    pub multichannel: MultichannelSweep,
    /// Largest index in the closed-form energy table.
    pub table_n_max: u32,
    pub out: PathBuf,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            preset: None,
            v: 15.0,
            l: 1.0,
            c: vec![1.0],
            regime: Regime::Above,
            mode: DispersionMode::SquaredPhase,
            kappa_grid: KappaGrid {
                start: 0.0,
                stop: 4.0 * PI,
                step: 0.01,
            },
            e_window: None,
            branches: None,
            default_branch_count: 4,
            max_roots: None,
            settings: SolverSettings::default(),
            energy: 16.0,
            n_list: (0..=14).map(|p| 1usize << p).collect(),
            multichannel: MultichannelSweep::default(),
            table_n_max: 3,
            out: PathBuf::from("out"),
            format: OutputFormat::Csv,
        }
    }
}

fn ratio_sweep(count: u32) -> Vec<f64> {
    (1..=count).map(|n| n as f64 / 5.0).collect()
}

impl RunConfig {
    pub fn preset(name: &str) -> CliResult<Self> {
        let mut cfg = RunConfig {
            preset: Some(name.to_string()),
            ..RunConfig::default()
        };
        let (l, regime, count) = match name {
            "fig1" => (100.0, Regime::Above, 9),
            "fig2" => (5.0, Regime::Above, 9),
            "fig3" => (0.3, Regime::Above, 9),
            "fig4" => (30.0, Regime::Below, 14),
            "fig5" => (5.0, Regime::Below, 14),
            "fig6" => (0.8, Regime::Below, 14),
            "fig7" => (0.278, Regime::Below, 14),
            "converge" => return Ok(cfg),
            "table1" => {
                cfg.v = 1.0;
                cfg.l = 1.0;
                cfg.c = vec![1.0];
                return Ok(cfg);
            }
            other => {
                return Err(CliError::Config(format!(
                    "unknown preset '{other}' (known: {})",
                    PRESETS.join(", ")
                )))
            }
        };
        cfg.v = 15.0;
        cfg.l = l;
        cfg.regime = regime;
        cfg.c = ratio_sweep(count);
        Ok(cfg)
    }

    /// Defaults, then the preset named by the file or the flags (flags win),
    /// then the file, then the flags.
    pub fn resolve(file: Option<&ConfigOverrides>, flags: &ConfigOverrides) -> CliResult<Self> {
        let preset = flags
            .preset
            .as_deref()
            .or_else(|| file.and_then(|f| f.preset.as_deref()));
        let mut cfg = match preset {
            Some(p) => RunConfig::preset(p)?,
            None => RunConfig::default(),
        };
        if let Some(f) = file {
            cfg.apply(f);
        }
        cfg.apply(flags);
        cfg.preset = preset.map(str::to_string);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &ConfigOverrides) {
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = &o.$field { self.$field = v.clone(); })*
            };
        }
        set!(
            v,
            l,
            c,
            regime,
            mode,
            kappa_grid,
            default_branch_count,
            energy,
            n_list,
            table_n_max,
            out,
            format
        );
        if o.e_window.is_some() {
            self.e_window = o.e_window;
        }
        if o.branches.is_some() {
            self.branches = o.branches;
        }
        if o.max_roots.is_some() {
            self.max_roots = o.max_roots;
        }
        if let Some(s) = &o.settings {
            s.apply(&mut self.settings);
        }
        if let Some(m) = &o.multichannel {
            m.apply(&mut self.multichannel);
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.c.is_empty() {
            return Err(CliError::Config("no c values".into()));
        }
        for &c in &self.c {
            self.system(c)?;
        }
        if self.default_branch_count < 1 {
            return Err(CliError::Config("default_branch_count must be >= 1".into()));
        }
        let s = &self.settings;
        let positive = [
            ("barrier_band", s.barrier_band),
            ("period_divisions", s.period_divisions),
            ("window_divisions", s.window_divisions),
            ("root_tol", s.root_tol),
            ("residual_tol", s.residual_tol),
            ("tangency_tol", s.tangency_tol),
            ("jump_fraction", s.jump_fraction),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(CliError::Config(format!("{name} must be > 0, got {value}")));
            }
        }
        Ok(())
    }

    pub fn system(&self, c: f64) -> CliResult<SystemConfig> {
        SystemConfig::new(self.v, self.l, c, self.regime)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load_file(path: &Path) -> CliResult<ConfigOverrides> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
    }
}

/// Every `RunConfig` key as an optional override; same JSON names.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub preset: Option<String>,
    #[serde(rename = "V")]
    pub v: Option<f64>,
    #[serde(rename = "L")]
    pub l: Option<f64>,
    pub c: Option<Vec<f64>>,
    pub regime: Option<Regime>,
    pub mode: Option<DispersionMode>,
    pub kappa_grid: Option<KappaGrid>,
    pub e_window: Option<EnergyWindow>,
    pub branches: Option<BranchWindow>,
    pub default_branch_count: Option<i64>,
    pub max_roots: Option<usize>,
    pub settings: Option<SettingsOverrides>,
    pub energy: Option<f64>,
    pub n_list: Option<Vec<usize>>,
    pub multichannel: Option<MultichannelOverrides>,
    pub table_n_max: Option<u32>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SettingsOverrides {
    pub barrier_band: Option<f64>,
    pub period_divisions: Option<f64>,
    pub window_divisions: Option<f64>,
    pub max_grid_points: Option<usize>,
    pub root_tol: Option<f64>,
    pub residual_tol: Option<f64>,
    pub tangency_tol: Option<f64>,
    pub jump_fraction: Option<f64>,
    pub plateau_c: Option<f64>,
    pub plateau_width: Option<f64>,
}

impl SettingsOverrides {
    fn apply(&self, s: &mut SolverSettings) {
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { s.$field = v; })*
            };
        }
        set!(
            barrier_band,
            period_divisions,
            window_divisions,
            max_grid_points,
            root_tol,
            residual_tol,
            tangency_tol,
            jump_fraction,
            plateau_c,
            plateau_width
        );
    }

    pub fn is_empty(&self) -> bool {
        *self == SettingsOverrides::default()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultichannelOverrides {
    pub channels: Option<Vec<u32>>,
    pub scatterers: Option<Vec<u64>>,
    pub length: Option<f64>,
    pub k: Option<Vec<f64>>,
    pub beta: Option<Vec<f64>>,
    pub beta_k: Option<Vec<f64>>,
}

impl MultichannelOverrides {
    fn apply(&self, m: &mut MultichannelSweep) {
        if let Some(v) = &self.channels {
            m.channels = v.clone();
        }
        if let Some(v) = &self.scatterers {
            m.scatterers = v.clone();
        }
        if let Some(v) = self.length {
            m.length = v;
        }
        if let Some(v) = &self.k {
            m.k = v.clone();
        }
        if let Some(v) = &self.beta {
            m.beta = v.clone();
        }
        if let Some(v) = &self.beta_k {
            m.beta_k = v.clone();
        }
    }

    pub fn is_empty(&self) -> bool {
        *self == MultichannelOverrides::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_grid_parsing() {
        let g: KappaGrid = "0:2pi:0.5pi".parse().unwrap();
        let pts = g.points().unwrap();
        assert_eq!(pts.len(), 5);
        assert!((pts[4] - 2.0 * PI).abs() < 1e-12);
        assert!("1:0:0.1".parse::<KappaGrid>().unwrap().points().is_err());
        assert!("0:1:0".parse::<KappaGrid>().unwrap().points().is_err());
        assert!("0:1".parse::<KappaGrid>().is_err());
    }

    #[test]
    fn presets_follow_captions() {
        let f1 = RunConfig::preset("fig1").unwrap();
        assert_eq!(
            (f1.v, f1.l, f1.regime, f1.c.len()),
            (15.0, 100.0, Regime::Above, 9)
        );
        assert_eq!(f1.c[8], 1.8);
        let f7 = RunConfig::preset("fig7").unwrap();
        assert_eq!((f7.l, f7.regime, f7.c.len()), (0.278, Regime::Below, 14));
        assert_eq!(f7.c[13], 2.8);
        assert!(RunConfig::preset("fig9").is_err());
    }

    #[test]
    fn layering_order() {
        let file = ConfigOverrides {
            preset: Some("fig2".into()),
            l: Some(7.0),
            energy: Some(20.0),
            ..Default::default()
        };
        let flags = ConfigOverrides {
            l: Some(9.0),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(Some(&file), &flags).unwrap();
        assert_eq!(cfg.l, 9.0);
        assert_eq!(cfg.energy, 20.0);
        assert_eq!(cfg.c.len(), 9);
        assert_eq!(cfg.preset.as_deref(), Some("fig2"));
    }

    #[test]
    fn round_trips_through_json() {
        let mut cfg = RunConfig::preset("fig5").unwrap();
        cfg.e_window = Some(EnergyWindow::new(12.0, 14.0));
        cfg.branches = Some(BranchWindow { min: 2, max: 5 });
        let text = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }

    #[test]
    fn rejects_bad_values() {
        let flags = ConfigOverrides {
            l: Some(-1.0),
            ..Default::default()
        };
        assert!(matches!(
            RunConfig::resolve(None, &flags),
            Err(CliError::Config(_))
        ));
        let bad: Result<ConfigOverrides, _> = serde_json::from_str(r#"{"Vee": 3}"#);
        assert!(bad.is_err());
    }
}
