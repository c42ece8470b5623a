//! Finite barrier chains built from explicit per-barrier transfer matrices.
//!
//! Amplitudes are referenced to global plane waves `A e^{ikx} + B e^{−ikx}`,
//! so a barrier occupying `[x0, x0 + w]` contributes `W(x0+w)⁻¹·P·W(x0)`,
//! where `W(x)` maps amplitudes to `(ψ, ψ')` and `P` propagates `(ψ, ψ')`
//! through the barrier. Free propagation between barriers is then the
//! identity and the chain matrix is the plain ordered product.

use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::model::{limit_matrix, DEFAULT_BARRIER_BAND};
use crate::{Error, Regime, Result, SystemConfig, TransferMatrix2};

/// Products are rescaled once an entry exceeds this magnitude.
const RENORM_LIMIT: f64 = 1e150;

/// `n` identical barriers of total width `a` spread over `[−L/2, L/2]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub cfg: SystemConfig,
    pub n: usize,
    /// Width of each barrier, `a/n`.
    pub width: f64,
    /// Gap between neighbours, `b/(n−1)`; `None` for a single barrier.
    pub spacing: Option<f64>,
    /// Left edge of each barrier, strictly increasing.
    pub positions: Vec<f64>,
}

impl ChainSpec {
    /// A single barrier (`n = 1`) is centred with width `a`.
    pub fn new(cfg: &SystemConfig, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("a chain needs at least one barrier".into()));
        }
        let geo = cfg.geometry();
        let width = geo.a / n as f64;
        let (spacing, positions) = if n == 1 {
            (None, vec![-geo.a / 2.0])
        } else {
            let s = geo.b / (n - 1) as f64;
            let half = cfg.l / 2.0;
            (
                Some(s),
                (0..n).map(|j| -half + j as f64 * (width + s)).collect(),
            )
        };
        Ok(Self {
            cfg: *cfg,
            n,
            width,
            spacing,
            positions,
        })
    }

    /// `n·w + (n−1)·s`.
    pub fn covered_length(&self) -> f64 {
        self.n as f64 * self.width + self.spacing.map_or(0.0, |s| (self.n - 1) as f64 * s)
    }
}

/// Transfer matrix of one barrier of height `v` on `[x0, x0 + w]`.
pub fn single_barrier_matrix(e: f64, v: f64, w: f64, x0: f64) -> Result<TransferMatrix2> {
    if !(e.is_finite() && e > 0.0) {
        return Err(Error::Domain(format!("energy must be > 0, got {e}")));
    }
    if !(w.is_finite() && w > 0.0) {
        return Err(Error::Domain(format!("barrier width must be > 0, got {w}")));
    }
    if e == v || (e - v).abs() < DEFAULT_BARRIER_BAND * v {
        return Err(Error::Singular {
            energy: e,
            barrier: v,
        });
    }
    let k = e.sqrt();
    // (ψ, ψ') propagator [[p11, p12], [p21, p22]] across the barrier.
    let (p11, p12, p21) = if e > v {
        let q = (e - v).sqrt();
        let (s, c) = (q * w).sin_cos();
        (c, s / q, -q * s)
    } else {
        let q = (v - e).sqrt();
        let (s, c) = ((q * w).sinh(), (q * w).cosh());
        (c, s / q, q * s)
    };
    let p22 = p11;

    let x1 = x0 + w;
    let ik = Complex64::new(0.0, k);
    let e0 = Complex64::from_polar(1.0, k * x0);
    let e1 = Complex64::from_polar(1.0, k * x1);
    // W(x0) columns: (e^{ikx0}, ik e^{ikx0}) and (e^{−ikx0}, −ik e^{−ikx0}).
    let w0 = [[e0, e0.conj()], [ik * e0, -ik * e0.conj()]];
    let mut pw = [[Complex64::default(); 2]; 2];
    for j in 0..2 {
        pw[0][j] = p11 * w0[0][j] + p12 * w0[1][j];
        pw[1][j] = p21 * w0[0][j] + p22 * w0[1][j];
    }
    // W(x1)⁻¹ = ½ [[e^{−ikx1}, e^{−ikx1}/(ik)], [e^{ikx1}, −e^{ikx1}/(ik)]].
    let inv = [
        [0.5 * e1.conj(), 0.5 * e1.conj() / ik],
        [0.5 * e1, -0.5 * e1 / ik],
    ];
    let entry = |r: usize, c: usize| inv[r][0] * pw[0][c] + inv[r][1] * pw[1][c];
    Ok(TransferMatrix2::new(
        entry(0, 0),
        entry(0, 1),
        entry(1, 0),
        entry(1, 1),
    ))
}

/// Textbook transmission probability of one rectangular barrier.
pub fn barrier_transmission(e: f64, v: f64, w: f64) -> f64 {
    let q = (e - v).abs().sqrt();
    let s2 = if e > v {
        (q * w).sin().powi(2)
    } else {
        (q * w).sinh().powi(2)
    };
    1.0 / (1.0 + v * v * s2 / (4.0 * e * (e - v).abs()))
}

/// A product held as `exp(log_scale)·matrix`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledMatrix {
    pub matrix: TransferMatrix2,
    pub log_scale: f64,
}

impl ScaledMatrix {
    pub fn identity() -> Self {
        Self {
            matrix: TransferMatrix2::identity(),
            log_scale: 0.0,
        }
    }

    /// `self · other`.
    pub fn then_after(&self, other: &ScaledMatrix) -> ScaledMatrix {
        let mut out = ScaledMatrix {
            matrix: self.matrix * other.matrix,
            log_scale: self.log_scale + other.log_scale,
        };
        out.renormalize();
        out
    }

    fn renormalize(&mut self) {
        let m = self.matrix.max_abs();
        if m > RENORM_LIMIT {
            self.matrix = self.matrix.scale(1.0 / m);
            self.log_scale += m.ln();
        }
    }

    /// Determinant of the unscaled product; overflows for heavily rescaled chains.
    pub fn det(&self) -> Complex64 {
        self.matrix.det() * (2.0 * self.log_scale).exp()
    }

    /// The unscaled matrix (entries may overflow to infinity).
    pub fn unscaled(&self) -> TransferMatrix2 {
        self.matrix.scale(self.log_scale.exp())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringResult {
    pub transmission: f64,
    pub reflection: f64,
    pub product: ScaledMatrix,
}

impl ScatteringResult {
    pub fn from_product(product: ScaledMatrix) -> Self {
        let m = &product.matrix;
        let m22 = m.m22.norm_sqr();
        Self {
            transmission: (-2.0 * product.log_scale).exp() / m22,
            reflection: m.m21.norm_sqr() / m22,
            product,
        }
    }
}

/// Ordered product over barriers `range` (left to right), rightmost factor last applied.
pub fn chain_product_range(spec: &ChainSpec, e: f64, range: Range<usize>) -> Result<ScaledMatrix> {
    if range.end > spec.n || range.start > range.end {
        return Err(Error::Domain(format!(
            "barrier range {range:?} outside 0..{}",
            spec.n
        )));
    }
    let mut acc = ScaledMatrix::identity();
    for &x0 in &spec.positions[range] {
        let m = single_barrier_matrix(e, spec.cfg.v, spec.width, x0)?;
        acc.matrix = m * acc.matrix;
        acc.renormalize();
    }
    Ok(acc)
}

pub fn chain_product(spec: &ChainSpec, e: f64) -> Result<ScatteringResult> {
    Ok(ScatteringResult::from_product(chain_product_range(
        spec,
        e,
        0..spec.n,
    )?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    /// Frobenius distance of the chain matrix to the closed-form limit matrix.
    pub distance: f64,
    /// Same, after moving the chain to start at `x = 0` (the limit matrix's
    /// phase reference).
    pub distance_left_edge: f64,
    /// Distance (left-edge referenced) to one uniform barrier of height
    /// `V/(1+c)` spanning `[0, L]`; `None` when that barrier is singular at `E`.
    pub distance_effective: Option<f64>,
    pub transmission: f64,
    pub reflection: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendSummary {
    /// Smallest listed `n` from which `T(n)` is monotone through the last row.
    pub transmission_monotone_from: usize,
    /// Smallest listed `n` from which the left-edge distance is monotone.
    pub distance_monotone_from: usize,
    pub first_transmission: f64,
    pub last_transmission: f64,
    /// `|T(n_last) − T(n_prev)|`.
    pub last_change: f64,
    /// `last_change` over the change before it; below 1 when the steps shrink.
    pub change_ratio: Option<f64>,
    /// Transmission of the uniform `V/(1+c)` barrier spanning `L`.
    pub effective_medium_transmission: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub cfg: SystemConfig,
    pub energy: f64,
    pub limit: TransferMatrix2,
    pub rows: Vec<ConvergenceRow>,
    pub trend: TrendSummary,
}

/// Measures chains of `n_list` barriers against the dense-limit matrix.
/// Nothing about the limit is assumed; the table is the result.
pub fn convergence_report(
    cfg: &SystemConfig,
    e: f64,
    n_list: &[usize],
) -> Result<ConvergenceReport> {
    if n_list.is_empty() {
        return Err(Error::Domain("n list is empty".into()));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("n list must be strictly ascending".into()));
    }
    let regime = if e > cfg.v {
        Regime::Above
    } else {
        Regime::Below
    };
    let cfg = cfg.with_regime(regime);
    let limit = limit_matrix(&cfg, e)?;
    let effective = single_barrier_matrix(e, cfg.branch_point(), cfg.l, 0.0).ok();
    let k = e.sqrt();

    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let spec = ChainSpec::new(&cfg, n)?;
        let res = chain_product(&spec, e)?;
        let m = res.product.unscaled();
        let shifted = m.translated(k, cfg.l / 2.0);
        rows.push(ConvergenceRow {
            n,
            distance: m.frobenius_distance(&limit),
            distance_left_edge: shifted.frobenius_distance(&limit),
            distance_effective: effective.map(|eff| shifted.frobenius_distance(&eff)),
            transmission: res.transmission,
            reflection: res.reflection,
        });
    }

    let ts: Vec<f64> = rows.iter().map(|r| r.transmission).collect();
    let ds: Vec<f64> = rows.iter().map(|r| r.distance_left_edge).collect();
    let steps: Vec<f64> = ts.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let trend = TrendSummary {
        transmission_monotone_from: n_list[monotone_tail_start(&ts)],
        distance_monotone_from: n_list[monotone_tail_start(&ds)],
        first_transmission: ts[0],
        last_transmission: ts[ts.len() - 1],
        last_change: steps.last().copied().unwrap_or(0.0),
        change_ratio: (steps.len() >= 2)
            .then(|| steps[steps.len() - 1] / steps[steps.len() - 2])
            .filter(|r| r.is_finite()),
        effective_medium_transmission: effective.map(|m| 1.0 / m.m22.norm_sqr()),
    };
    Ok(ConvergenceReport {
        cfg,
        energy: e,
        limit,
        rows,
        trend,
    })
}

/// Index from which `xs` is monotone (non-increasing or non-decreasing) to the end.
fn monotone_tail_start(xs: &[f64]) -> usize {
    let tail = |up: bool| {
        let mut i = xs.len().saturating_sub(1);
        while i > 0 && ((xs[i] >= xs[i - 1]) == up || xs[i] == xs[i - 1]) {
            i -= 1;
        }
        i
    };
    tail(true).min(tail(false))
}
