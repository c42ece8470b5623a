//! The dispersion relation `tan²κ = g(E)·tan²(arg(E))` and everything built on it.
//!
//! `g(E) = 1 + V²/(4E(1+c)(E(1+c) − V))` equals `f²/φ²` in both regimes. The
//! tangent argument is either `θ = L²(E − V/(1+c)) = φ²` ([`DispersionMode::SquaredPhase`],
//! the form used for the closed-form energy tables and threshold values) or
//! `φ = √θ` ([`DispersionMode::Phase`], which reproduces the eigen-phase of
//! the limit matrix exactly).
//!
//! Squaring introduces tangencies: at `κ = 0` the residual `cos²κ − 1/(1+g tan²)`
//! touches zero without changing sign. The solver therefore brackets the two
//! signed factors `√g sin(arg) cos κ ∓ cos(arg) sin κ`, whose product is the
//! residual numerator, and reports coinciding roots with multiplicity 2.

mod closed_form;
mod scan;
mod solver;

use serde::{Deserialize, Serialize};

use crate::model::DEFAULT_BARRIER_BAND;
use crate::{Error, Regime, Result, SystemConfig};

pub use closed_form::{
    admissible, constant_energy_plateau, linear_regime_energy, special_energies,
    special_energy_record, Admissibility, KappaClass, Sign, SpecialEnergy, SpecialKappa,
};
pub use scan::{
    scan_bands, scan_spectrum, BandGapReport, Jump, KappaInterval, KappaScan, ScanMeta,
};
pub use solver::{
    branch_window_energies, clip_to_regime, small_l_energies, solve_energies, BranchWindow,
    EnergyGrid,
};

/// Distance of `cos(arg)` from zero below which a tangent pole is flagged.
pub const POLE_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DispersionMode {
    /// Tangent argument `L²(E − V/(1+c))`.
    #[default]
    SquaredPhase,
    /// Tangent argument `L·√(E − V/(1+c))`.
    Phase,
}

impl DispersionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DispersionMode::SquaredPhase => "squared-phase",
            DispersionMode::Phase => "phase",
        }
    }
}

impl std::str::FromStr for DispersionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squared-phase" | "squared" => Ok(DispersionMode::SquaredPhase),
            "phase" => Ok(DispersionMode::Phase),
            other => Err(Error::Domain(format!("unknown dispersion mode '{other}'"))),
        }
    }
}

/// Tolerances and grid controls shared by the solver and the scans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    /// Relative half-width of the excluded band around `E = V`.
    pub barrier_band: f64,
    /// Grid step is at most `π/(period_divisions·L²)` in squared-phase mode.
    pub period_divisions: f64,
    /// Grid step is at most `window/window_divisions`.
    pub window_divisions: f64,
    /// Refuse rather than evaluate more grid points than this.
    pub max_grid_points: usize,
    /// Bisection stops once the bracket is below `root_tol·max(1, E)`
    /// (it also stops at floating-point resolution).
    pub root_tol: f64,
    /// Every returned root must satisfy `|cos²κ − 1/(1+g tan²)|` below this.
    pub residual_tol: f64,
    /// Residual dip accepted as a tangential (double) root.
    pub tangency_tol: f64,
    /// Jumps are reported above `jump_fraction·(window width)`.
    pub jump_fraction: f64,
    /// `c` below which the constant-energy plateau is flagged.
    pub plateau_c: f64,
    /// Relative distance from the plateau energy within which roots are flagged.
    pub plateau_width: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            barrier_band: DEFAULT_BARRIER_BAND,
            period_divisions: 8.0,
            window_divisions: 1024.0,
            max_grid_points: 20_000_000,
            root_tol: 1e-14,
            residual_tol: 1e-8,
            tangency_tol: 1e-12,
            jump_fraction: 0.05,
            plateau_c: 0.05,
            plateau_width: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyWindow {
    pub lo: f64,
    pub hi: f64,
}

impl EnergyWindow {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_valid(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi
    }

    pub fn contains(&self, e: f64) -> bool {
        e >= self.lo && e <= self.hi
    }

    pub fn intersect(&self, other: &EnergyWindow) -> Option<EnergyWindow> {
        let w = EnergyWindow::new(self.lo.max(other.lo), self.hi.min(other.hi));
        w.is_valid().then_some(w)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleFlags {
    /// The tangent argument sits on a pole (`κ ≡ π/2 mod π` family).
    pub pole: bool,
    /// The root lies on the small-`c` constant-energy plateau.
    pub plateau: bool,
}

impl SampleFlags {
    pub fn render(&self) -> String {
        let mut parts = Vec::new();
        if self.pole {
            parts.push("pole");
        }
        if self.plateau {
            parts.push("plateau");
        }
        parts.join(";")
    }
}

/// One root `E(κ)` of the dispersion relation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSample {
    pub kappa: f64,
    pub energy: f64,
    /// `N` in `κ = Nπ + κ₀`, `κ₀ ∈ (−π/2, π/2]`.
    pub kappa_branch: i64,
    /// Tangent period of the argument at the root: `arg = Ńπ + ψ`, `|ψ| ≤ π/2`.
    pub energy_branch: i64,
    /// 2 for tangential roots of the squared relation.
    pub multiplicity: u8,
    pub mode: DispersionMode,
    pub regime: Regime,
    pub flags: SampleFlags,
}

/// `cos²κ` on the right-hand side of the squared relation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cos2Kappa {
    pub value: f64,
    /// Set when the tangent argument is within [`POLE_EPS`] of a pole; `value` is then 0.
    pub at_pole: bool,
}

pub fn coefficient_g(e: f64, v: f64, c: f64) -> Result<f64> {
    if !(e.is_finite() && e > 0.0) {
        return Err(Error::Domain(format!("energy must be > 0, got {e}")));
    }
    if v == 0.0 {
        return Ok(1.0);
    }
    let s = 1.0 + c;
    // Same difference as the tangent argument, so both round alike near V/(1+c).
    let gap = e - v / s;
    if gap == 0.0 {
        return Err(Error::CoefficientPole { energy: e });
    }
    Ok(1.0 + v * v / (4.0 * e * s * s * gap))
}

/// The tangent argument for `mode`. Below `E = V/(1+c)` the phase form has
/// no real value and the energy is reported as excluded.
pub fn tangent_argument(cfg: &SystemConfig, e: f64, mode: DispersionMode) -> Result<f64> {
    let theta = cfg.l * cfg.l * (e - cfg.branch_point());
    match mode {
        DispersionMode::SquaredPhase => Ok(theta),
        DispersionMode::Phase if theta >= 0.0 => Ok(theta.sqrt()),
        DispersionMode::Phase => Err(Error::ExcludedEnergy {
            energy: e,
            lower: cfg.branch_point(),
        }),
    }
}

/// Checks `e` against the regime's domain and the barrier exclusion band.
pub(crate) fn check_regime_energy(cfg: &SystemConfig, e: f64, band: f64) -> Result<()> {
    if !(e.is_finite() && e > 0.0) {
        return Err(Error::Domain(format!("energy must be > 0, got {e}")));
    }
    if cfg.in_barrier_band(e, band) {
        return Err(Error::Singular {
            energy: e,
            barrier: cfg.v,
        });
    }
    match cfg.regime {
        Regime::Above if e < cfg.v => Err(Error::Domain(format!(
            "above-barrier regime needs E > V (E = {e}, V = {})",
            cfg.v
        ))),
        Regime::Below if e > cfg.v => Err(Error::Domain(format!(
            "below-barrier regime needs E < V (E = {e}, V = {})",
            cfg.v
        ))),
        _ => Ok(()),
    }
}

/// `1/(1 + g tan²(arg))`, evaluated as `cos²/(cos² + g sin²)` so it stays finite at poles.
pub fn cos2_kappa(cfg: &SystemConfig, e: f64, mode: DispersionMode) -> Result<Cos2Kappa> {
    check_regime_energy(cfg, e, DEFAULT_BARRIER_BAND)?;
    let g = coefficient_g(e, cfg.v, cfg.c)?;
    if g <= 0.0 {
        return Err(Error::ExcludedEnergy {
            energy: e,
            lower: cfg.branch_point(),
        });
    }
    let arg = tangent_argument(cfg, e, mode)?;
    Ok(cos2_from_parts(g, arg.cos(), arg.sin()))
}

pub(crate) fn cos2_from_parts(g: f64, cos: f64, sin: f64) -> Cos2Kappa {
    if cos.abs() < POLE_EPS {
        return Cos2Kappa {
            value: 0.0,
            at_pole: true,
        };
    }
    let c2 = cos * cos;
    Cos2Kappa {
        value: c2 / (c2 + g * sin * sin),
        at_pole: false,
    }
}

/// `N` such that `κ = Nπ + κ₀` with `κ₀ ∈ (−π/2, π/2]`.
pub fn kappa_branch(kappa: f64) -> i64 {
    (kappa / std::f64::consts::PI - 0.5).ceil() as i64
}
