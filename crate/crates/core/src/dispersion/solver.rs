//! Bracket-and-bisect root finding for the dispersion relation.
//!
//! An [`EnergyGrid`] evaluates `A(E) = √g·T(arg)` and `B(E) = C(arg)` once on a
//! grid fine enough that no tangent period is skipped (`T, C = sin, cos`, or
//! `arg, 1` for the small-`L` linearization). For a given `κ` the two signed
//! factors `A cos κ ∓ B sin κ` are scanned for sign changes and each bracket
//! is bisected with direct evaluations. The grid is reusable across `κ`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{
    constant_energy_plateau, cos2_from_parts, kappa_branch, Cos2Kappa, DispersionMode,
    EnergyWindow, SampleFlags, SolverSettings, SpectrumSample,
};
use crate::{Error, Regime, Result, SystemConfig};

/// Largest |θ| allowed over a window for the small-`L` linearization `tan θ ≈ θ`.
pub const SMALL_L_GUARD: f64 = 0.1;

/// Below-barrier grids start this far (relative) above `V/(1+c)`, where `g` has its pole.
const BRANCH_POINT_OFFSET: f64 = 1e-12;

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// An inclusive range of tangent periods `Ń` (`arg = Ńπ + ψ`, `|ψ| ≤ π/2`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchWindow {
    pub min: i64,
    pub max: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Argument {
    SquaredPhase,
    Phase,
    /// `tan θ` replaced by `θ`.
    Linearized,
}

impl From<DispersionMode> for Argument {
    fn from(mode: DispersionMode) -> Self {
        match mode {
            DispersionMode::SquaredPhase => Argument::SquaredPhase,
            DispersionMode::Phase => Argument::Phase,
        }
    }
}

/// The relation being solved, evaluated pointwise.
#[derive(Debug, Clone, Copy)]
struct Relation {
    v: f64,
    l2: f64,
    s: f64,
    e0: f64,
    arg: Argument,
}

impl Relation {
    fn new(cfg: &SystemConfig, arg: Argument) -> Self {
        Self {
            v: cfg.v,
            l2: cfg.l * cfg.l,
            s: 1.0 + cfg.c,
            e0: cfg.branch_point(),
            arg,
        }
    }

    fn g(&self, e: f64) -> f64 {
        if self.v == 0.0 {
            return 1.0;
        }
        1.0 + self.v * self.v / (4.0 * e * self.s * self.s * (e - self.e0))
    }

    fn argument(&self, e: f64) -> f64 {
        let theta = self.l2 * (e - self.e0);
        match self.arg {
            Argument::SquaredPhase | Argument::Linearized => theta,
            Argument::Phase => theta.max(0.0).sqrt(),
        }
    }

    /// `(A, B)` with the signed factors `A cos κ ∓ B sin κ`.
    fn parts(&self, e: f64) -> (f64, f64) {
        let root_g = self.g(e).sqrt();
        let arg = self.argument(e);
        match self.arg {
            Argument::Linearized => (root_g * arg, 1.0),
            _ => {
                let (sin, cos) = arg.sin_cos();
                (root_g * sin, cos)
            }
        }
    }

    fn factor(&self, e: f64, cos_k: f64, sin_k: f64, sign: f64) -> f64 {
        let (a, b) = self.parts(e);
        a * cos_k - sign * b * sin_k
    }

    fn cos2(&self, e: f64) -> Cos2Kappa {
        let g = self.g(e);
        let arg = self.argument(e);
        match self.arg {
            Argument::Linearized => Cos2Kappa {
                value: 1.0 / (1.0 + g * arg * arg),
                at_pole: false,
            },
            _ => {
                let (sin, cos) = arg.sin_cos();
                cos2_from_parts(g, cos, sin)
            }
        }
    }
}

/// Restricts `window` to the part of the regime's domain the solver accepts:
/// `(V(1+band), ∞)` above, `[V/(1+c), V(1−band))` below.
pub fn clip_to_regime(
    cfg: &SystemConfig,
    window: &EnergyWindow,
    settings: &SolverSettings,
) -> Option<EnergyWindow> {
    let domain = match cfg.regime {
        Regime::Above => EnergyWindow::new(
            (cfg.v * (1.0 + settings.barrier_band)).max(f64::MIN_POSITIVE),
            f64::MAX,
        ),
        Regime::Below => {
            EnergyWindow::new(cfg.branch_point(), cfg.v * (1.0 - settings.barrier_band))
        }
    };
    window.intersect(&domain)
}

/// Energies spanned by the tangent periods in `branches`, clipped to `arg ≥ 0`.
pub fn branch_window_energies(
    cfg: &SystemConfig,
    mode: DispersionMode,
    branches: BranchWindow,
) -> Option<EnergyWindow> {
    if branches.max < branches.min {
        return None;
    }
    let lo_arg = ((branches.min as f64 - 0.5) * PI).max(0.0);
    let hi_arg = (branches.max as f64 + 0.5) * PI;
    if hi_arg <= 0.0 {
        return None;
    }
    let l2 = cfg.l * cfg.l;
    let e0 = cfg.branch_point();
    let to_energy = |arg: f64| match mode {
        DispersionMode::SquaredPhase => e0 + arg / l2,
        DispersionMode::Phase => e0 + arg * arg / l2,
    };
    let w = EnergyWindow::new(to_energy(lo_arg), to_energy(hi_arg));
    w.is_valid().then_some(w)
}

/// Precomputed dispersion factors on an energy grid, reusable across `κ`.
#[derive(Debug, Clone)]
pub struct EnergyGrid {
    cfg: SystemConfig,
    mode: DispersionMode,
    relation: Relation,
    settings: SolverSettings,
    /// Window after removing `E ≤ V/(1+c)`; `None` when nothing is left.
    effective: Option<EnergyWindow>,
    energies: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl EnergyGrid {
    pub fn new(
        cfg: &SystemConfig,
        window: &EnergyWindow,
        mode: DispersionMode,
        settings: &SolverSettings,
    ) -> Result<Self> {
        Self::build(cfg, window, mode, Argument::from(mode), settings)
    }

    /// Grid for the small-`L` relation `tan²κ = g·θ²`; refuses when `|θ|`
    /// reaches [`SMALL_L_GUARD`] inside the window.
    pub fn linearized(
        cfg: &SystemConfig,
        window: &EnergyWindow,
        settings: &SolverSettings,
    ) -> Result<Self> {
        Self::build(
            cfg,
            window,
            DispersionMode::SquaredPhase,
            Argument::Linearized,
            settings,
        )
    }

    fn build(
        cfg: &SystemConfig,
        window: &EnergyWindow,
        mode: DispersionMode,
        arg: Argument,
        settings: &SolverSettings,
    ) -> Result<Self> {
        if !window.is_valid() {
            return Err(Error::EmptyWindow {
                lo: window.lo,
                hi: window.hi,
            });
        }
        validate_window(cfg, window, settings)?;

        let relation = Relation::new(cfg, arg);
        let e0 = cfg.branch_point();
        let lo = match cfg.regime {
            Regime::Below if window.lo <= e0 * (1.0 + BRANCH_POINT_OFFSET) => {
                e0 * (1.0 + BRANCH_POINT_OFFSET)
            }
            _ => window.lo,
        };
        let effective = (lo < window.hi).then(|| EnergyWindow::new(lo, window.hi));

        let mut grid = Self {
            cfg: *cfg,
            mode,
            relation,
            settings: *settings,
            effective,
            energies: Vec::new(),
            a: Vec::new(),
            b: Vec::new(),
        };
        let Some(eff) = effective else {
            return Ok(grid);
        };

        if arg == Argument::Linearized {
            let worst = relation
                .argument(eff.lo)
                .abs()
                .max(relation.argument(eff.hi).abs());
            if worst >= SMALL_L_GUARD {
                return Err(Error::GuardViolated(format!(
                    "|L²(E − V/(1+c))| reaches {worst:.4} in [{}, {}]; the linearization needs < {SMALL_L_GUARD}",
                    eff.lo, eff.hi
                )));
            }
        }

        let step = grid_step(&relation, &eff, settings);
        let needed = (eff.width() / step).ceil();
        if !needed.is_finite() || needed + 1.0 > settings.max_grid_points as f64 {
            return Err(Error::GridTooCoarse {
                needed: if needed.is_finite() {
                    needed as usize + 1
                } else {
                    usize::MAX
                },
                limit: settings.max_grid_points,
            });
        }
        let n = needed as usize + 1;
        grid.energies = (0..n)
            .map(|i| {
                if i + 1 == n {
                    eff.hi
                } else {
                    eff.lo + eff.width() * (i as f64) / ((n - 1) as f64)
                }
            })
            .collect();
        let (a, b): (Vec<f64>, Vec<f64>) = grid.energies.iter().map(|&e| relation.parts(e)).unzip();
        grid.a = a;
        grid.b = b;
        Ok(grid)
    }

    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    pub fn mode(&self) -> DispersionMode {
        self.mode
    }

    pub fn effective_window(&self) -> Option<EnergyWindow> {
        self.effective
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Largest spacing between grid points (0 for an empty grid).
    pub fn step(&self) -> f64 {
        self.energies
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// All roots at phase `kappa`, ascending in energy, at most `max_roots`.
    pub fn roots(&self, kappa: f64, max_roots: usize) -> Result<Vec<SpectrumSample>> {
        let n = self.energies.len();
        if n < 2 || max_roots == 0 {
            return Ok(Vec::new());
        }
        let (sin_k, cos_k) = kappa.sin_cos();
        let rel = self.relation;

        let mut brackets: Vec<Bracket> = Vec::new();
        for sign in [1.0, -1.0] {
            let h = |i: usize| self.a[i] * cos_k - sign * self.b[i] * sin_k;
            let mut prev = h(0);
            if prev == 0.0 {
                brackets.push(Bracket::Exact(self.energies[0]));
            }
            let mut prev2 = f64::NAN;
            for i in 1..n {
                let cur = h(i);
                if cur == 0.0 {
                    brackets.push(Bracket::Exact(self.energies[i]));
                } else if prev != 0.0 && (prev < 0.0) != (cur < 0.0) {
                    brackets.push(Bracket::Sign {
                        lo: self.energies[i - 1],
                        hi: self.energies[i],
                        f_lo: prev,
                        sign,
                    });
                } else if i >= 2
                    && prev != 0.0
                    && prev.abs() < prev2.abs()
                    && prev.abs() <= cur.abs()
                    && (prev2 < 0.0) == (prev < 0.0)
                    && (prev < 0.0) == (cur < 0.0)
                {
                    brackets.push(Bracket::Dip {
                        lo: self.energies[i - 2],
                        hi: self.energies[i],
                        sign,
                    });
                }
                prev2 = prev;
                prev = cur;
            }
        }
        brackets.sort_by(|x, y| x.left().total_cmp(&y.left()));

        let mut found: Vec<(f64, u8)> = Vec::new();
        for br in brackets {
            if found.len() >= max_roots {
                let last = found[found.len() - 1].0;
                if br.left() > last + merge_tol(last) {
                    break;
                }
            }
            let root = match br {
                Bracket::Exact(e) => Some((e, 1)),
                Bracket::Sign { lo, hi, f_lo, sign } => {
                    let f = |e: f64| rel.factor(e, cos_k, sin_k, sign);
                    let e = bisect(f, lo, hi, f_lo, self.settings.root_tol);
                    // Near a divergence of g the residual is steep in E.
                    let steep = (cos_k * cos_k - rel.cos2(e).value).abs()
                        >= 0.01 * self.settings.residual_tol;
                    Some((
                        if steep {
                            bisect(f, lo, hi, f_lo, 0.0)
                        } else {
                            e
                        },
                        1,
                    ))
                }
                Bracket::Dip { lo, hi, sign } => {
                    let f = |e: f64| rel.factor(e, cos_k, sin_k, sign).abs();
                    let e = golden_min(f, lo, hi);
                    let r = (cos_k * cos_k - rel.cos2(e).value).abs();
                    (r < self.settings.tangency_tol).then_some((e, 2))
                }
            };
            let Some((e, mult)) = root else { continue };
            match found
                .iter_mut()
                .find(|(x, _)| (x - e).abs() <= merge_tol(e))
            {
                Some(existing) => existing.1 = (existing.1 + mult).min(2),
                None => found.push((e, mult)),
            }
        }
        found.sort_by(|x, y| x.0.total_cmp(&y.0));
        found.truncate(max_roots);

        let plateau = constant_energy_plateau(&self.cfg, self.settings.plateau_c);
        let cos2_target = cos_k * cos_k;
        found
            .into_iter()
            .map(|(e, multiplicity)| {
                let c2 = rel.cos2(e);
                let residual = (cos2_target - c2.value).abs();
                if residual.is_nan() || residual >= self.settings.residual_tol {
                    return Err(Error::Residual {
                        energy: e,
                        residual,
                        tolerance: self.settings.residual_tol,
                    });
                }
                let flags = SampleFlags {
                    pole: c2.at_pole,
                    plateau: plateau
                        .is_some_and(|p| (e - p).abs() <= self.settings.plateau_width * p),
                };
                Ok(SpectrumSample {
                    kappa,
                    energy: e,
                    kappa_branch: kappa_branch(kappa),
                    energy_branch: (rel.argument(e) / PI).round() as i64,
                    multiplicity,
                    mode: self.mode,
                    regime: self.cfg.regime,
                    flags,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
enum Bracket {
    Exact(f64),
    Sign {
        lo: f64,
        hi: f64,
        f_lo: f64,
        sign: f64,
    },
    /// Local minimum of |factor| without a sign change: candidate tangency.
    Dip {
        lo: f64,
        hi: f64,
        sign: f64,
    },
}

impl Bracket {
    fn left(&self) -> f64 {
        match *self {
            Bracket::Exact(e) => e,
            Bracket::Sign { lo, .. } | Bracket::Dip { lo, .. } => lo,
        }
    }
}

fn merge_tol(e: f64) -> f64 {
    1e-12 * e.abs().max(1.0)
}

fn validate_window(
    cfg: &SystemConfig,
    window: &EnergyWindow,
    settings: &SolverSettings,
) -> Result<()> {
    if window.lo <= 0.0 {
        return Err(Error::Domain(format!(
            "energy window must be positive, got [{}, {}]",
            window.lo, window.hi
        )));
    }
    let band_lo = cfg.v * (1.0 - settings.barrier_band);
    let band_hi = cfg.v * (1.0 + settings.barrier_band);
    let pole_band = Error::PoleBand {
        lo: window.lo,
        hi: window.hi,
        barrier: cfg.v,
    };
    match cfg.regime {
        Regime::Above if window.lo < band_hi => {
            if window.hi <= band_lo {
                Err(Error::Domain(format!(
                    "above-barrier window [{}, {}] lies below V = {}",
                    window.lo, window.hi, cfg.v
                )))
            } else {
                Err(pole_band)
            }
        }
        Regime::Below if window.hi > band_lo => {
            if window.lo >= band_hi {
                Err(Error::Domain(format!(
                    "below-barrier window [{}, {}] lies above V = {}",
                    window.lo, window.hi, cfg.v
                )))
            } else {
                Err(pole_band)
            }
        }
        _ => Ok(()),
    }
}

fn grid_step(rel: &Relation, eff: &EnergyWindow, settings: &SolverSettings) -> f64 {
    let by_window = eff.width() / settings.window_divisions;
    let p = settings.period_divisions;
    let by_period = match rel.arg {
        Argument::SquaredPhase | Argument::Linearized => PI / (p * rel.l2),
        Argument::Phase => {
            let phi_lo = rel.argument(eff.lo);
            let by_slope = 2.0 * PI * phi_lo / (p * rel.l2);
            let holder = PI * PI / (p * p * rel.l2);
            by_slope.max(holder)
        }
    };
    by_window.min(by_period)
}

/// Bisects `f` on `[lo, hi]` (with `f(lo) = f_lo` of opposite sign to `f(hi)`)
/// until the bracket is below `tol·max(1, |E|)` or cannot be split further.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut f_lo: f64, tol: f64) -> f64 {
    loop {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi || hi - lo <= tol * mid.abs().max(1.0) {
            return mid;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        x1
    } else {
        x2
    }
}

/// All roots of `tan²κ = g(E)·tan²(arg(E))` in `window`, ascending in energy.
///
/// Below the barrier the part of the window with `E ≤ V/(1+c)` carries no
/// roots and is skipped.
pub fn solve_energies(
    cfg: &SystemConfig,
    kappa: f64,
    window: &EnergyWindow,
    mode: DispersionMode,
    max_roots: usize,
) -> Result<Vec<SpectrumSample>> {
    EnergyGrid::new(cfg, window, mode, &SolverSettings::default())?.roots(kappa, max_roots)
}

/// Roots of the small-`L` relation `tan²κ = g(E)·θ²`, `θ = L²(E − V/(1+c))`.
pub fn small_l_energies(
    cfg: &SystemConfig,
    kappa: f64,
    window: &EnergyWindow,
) -> Result<Vec<SpectrumSample>> {
    EnergyGrid::linearized(cfg, window, &SolverSettings::default())?.roots(kappa, usize::MAX)
}
