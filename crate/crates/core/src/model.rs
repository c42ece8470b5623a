//! Physical configuration and closed-form quantities of the dense barrier array.
//!
//! Everything here is a pure function of `(V, L, c, E)`. The limit transfer
//! matrices depend on the phase `φ` only through `cos φ` and `sin φ / φ`,
//! both even in `φ`, so they are evaluated from `φ²` directly and stay real
//! when `φ` turns imaginary below the branch point `E = V/(1+c)`.

use std::f64::consts::PI;
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Relative half-width of the band around `E = V` excluded from every domain.
pub const DEFAULT_BARRIER_BAND: f64 = 1e-9;

/// Below this |φ| the sinc factor switches to its Taylor series.
const SINC_SERIES_CUTOFF: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// E > V
    Above,
    /// 0 < E < V
    Below,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Above => "above",
            Regime::Below => "below",
        }
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "above" | "above-barrier" | "e>v" => Ok(Regime::Above),
            "below" | "below-barrier" | "e<v" => Ok(Regime::Below),
            other => Err(Error::Domain(format!("unknown regime '{other}'"))),
        }
    }
}

/// One physical instance of the barrier array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Barrier height.
    pub v: f64,
    /// Total length `a + b`.
    pub l: f64,
    /// Total interval over total barrier width, `b / a`.
    pub c: f64,
    pub regime: Regime,
}

impl SystemConfig {
    /// `V = 0` is accepted as the free-particle limit; `L` and `c` must be positive.
    pub fn new(v: f64, l: f64, c: f64, regime: Regime) -> Result<Self> {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::Domain(format!(
                "barrier height must be >= 0, got {v}"
            )));
        }
        derive_geometry(l, c)?;
        Ok(Self { v, l, c, regime })
    }

    pub fn with_regime(self, regime: Regime) -> Self {
        Self { regime, ..self }
    }

    pub fn geometry(&self) -> Geometry {
        Geometry {
            a: self.l / (1.0 + self.c),
            b: self.l * self.c / (1.0 + self.c),
        }
    }

    /// `V/(1+c)`: the energy where φ² changes sign.
    pub fn branch_point(&self) -> f64 {
        self.v / (1.0 + self.c)
    }

    /// `V L² c/(1+c)`: the value the tangent argument `L²(E − V/(1+c))` takes at `E = V`.
    pub fn barrier_argument(&self) -> f64 {
        self.v * self.l * self.l * self.c / (1.0 + self.c)
    }

    /// Whether `e` falls inside the excluded band `|E − V| < band·V`.
    pub fn in_barrier_band(&self, e: f64, band: f64) -> bool {
        (e - self.v).abs() < band * self.v || e == self.v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    /// Total barrier width.
    pub a: f64,
    /// Total interval between barriers.
    pub b: f64,
}

pub fn derive_geometry(l: f64, c: f64) -> Result<Geometry> {
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::Domain(format!("total length must be > 0, got {l}")));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::Domain(format!("ratio c must be > 0, got {c}")));
    }
    Ok(Geometry {
        a: l / (1.0 + c),
        b: l * c / (1.0 + c),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveNumbers {
    /// Outside wavenumber `√E`.
    pub k: f64,
    /// Inside wavenumber `√|E − V|`.
    pub q: f64,
    /// `q/k + k/q`
    pub xi: f64,
    /// `q/k − k/q`
    pub eta: f64,
}

pub fn wavenumbers(e: f64, v: f64, regime: Regime) -> Result<WaveNumbers> {
    if !(e.is_finite() && e > 0.0) {
        return Err(Error::Domain(format!("energy must be > 0, got {e}")));
    }
    if e == v {
        return Err(Error::Singular {
            energy: e,
            barrier: v,
        });
    }
    match regime {
        Regime::Above if e < v => {
            return Err(Error::Domain(format!(
                "above-barrier regime needs E > V (E = {e}, V = {v})"
            )))
        }
        Regime::Below if e > v => {
            return Err(Error::Domain(format!(
                "below-barrier regime needs E < V (E = {e}, V = {v})"
            )))
        }
        _ => {}
    }
    let k = e.sqrt();
    let q = (e - v).abs().sqrt();
    Ok(WaveNumbers {
        k,
        q,
        xi: q / k + k / q,
        eta: q / k - k / q,
    })
}

/// Regime-dependent scalars entering the limit transfer matrix.
///
/// Above the barrier `f = kb + aqξ/2`, `d = aqη/2`; below it
/// `f = kb − aqη/2`, `d = aqξ/2`. In both cases `φ² = f² − d²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeParams {
    pub f: f64,
    pub d: f64,
    /// `k(a + b)`
    pub z: f64,
    /// `f² − d²`, evaluated as `(f − d)(f + d)`.
    pub phi_sq: f64,
    /// Principal square root of `phi_sq`; purely imaginary when `phi_sq < 0`.
    pub phi: Complex64,
    pub waves: WaveNumbers,
    pub regime: Regime,
}

impl ShapeParams {
    pub fn phi_is_real(&self) -> bool {
        self.phi_sq >= 0.0
    }

    /// `(cos φ, sin φ / φ)`; both real for either sign of φ².
    pub fn cos_sinc(&self) -> (f64, f64) {
        cos_sinc(self.phi_sq)
    }
}

pub fn shape_params(cfg: &SystemConfig, e: f64) -> Result<ShapeParams> {
    let waves = wavenumbers(e, cfg.v, cfg.regime)?;
    let Geometry { a, b } = cfg.geometry();
    let WaveNumbers { k, q, xi, eta } = waves;
    let (f, d) = match cfg.regime {
        Regime::Above => (k * b + a * q * xi / 2.0, a * q * eta / 2.0),
        Regime::Below => (k * b - a * q * eta / 2.0, a * q * xi / 2.0),
    };
    let phi_sq = (f - d) * (f + d);
    let phi = if phi_sq >= 0.0 {
        Complex64::new(phi_sq.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-phi_sq).sqrt())
    };
    Ok(ShapeParams {
        f,
        d,
        z: k * (a + b),
        phi_sq,
        phi,
        waves,
        regime: cfg.regime,
    })
}

/// `(cos φ, sin φ/φ)` as functions of `φ²`, switching to cosh/sinh for `φ² < 0`.
pub fn cos_sinc(phi_sq: f64) -> (f64, f64) {
    if phi_sq >= 0.0 {
        let phi = phi_sq.sqrt();
        let sinc = if phi < SINC_SERIES_CUTOFF {
            1.0 - phi_sq / 6.0 + phi_sq * phi_sq / 120.0
        } else {
            phi.sin() / phi
        };
        (phi.cos(), sinc)
    } else {
        let s = (-phi_sq).sqrt();
        let sinhc = if s < SINC_SERIES_CUTOFF {
            1.0 + s * s / 6.0 + s * s * s * s / 120.0
        } else {
            s.sinh() / s
        };
        (s.cosh(), sinhc)
    }
}

/// A 2×2 complex matrix acting on `(A, B)` plane-wave amplitude pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix2 {
    pub m11: Complex64,
    pub m12: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
}

impl TransferMatrix2 {
    pub const fn new(m11: Complex64, m12: Complex64, m21: Complex64, m22: Complex64) -> Self {
        Self { m11, m12, m21, m22 }
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self::new(one, zero, zero, one)
    }

    pub fn det(&self) -> Complex64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn trace(&self) -> Complex64 {
        self.m11 + self.m22
    }

    pub fn entries(&self) -> [Complex64; 4] {
        [self.m11, self.m12, self.m21, self.m22]
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.m11 * s, self.m12 * s, self.m21 * s, self.m22 * s)
    }

    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        self.entries()
            .iter()
            .zip(other.entries().iter())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Conjugates by the translation `x → x + shift`, i.e. re-references
    /// global plane-wave amplitudes to an origin moved by `shift`.
    pub fn translated(&self, k: f64, shift: f64) -> Self {
        let ph = Complex64::from_polar(1.0, 2.0 * k * shift);
        Self::new(self.m11, self.m12 * ph.conj(), self.m21 * ph, self.m22)
    }
}

impl Mul for TransferMatrix2 {
    type Output = TransferMatrix2;

    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.m11 * rhs.m11 + self.m12 * rhs.m21,
            self.m11 * rhs.m12 + self.m12 * rhs.m22,
            self.m21 * rhs.m11 + self.m22 * rhs.m21,
            self.m21 * rhs.m12 + self.m22 * rhs.m22,
        )
    }
}

/// Dense-array limit of the total transfer matrix.
///
/// Entries are taken exactly as the closed forms for the two regimes, with
/// `sin φ/φ` evaluated from `φ²`. Note the above-barrier form has
/// `m21 = −i·conj(m12)` and is not unimodular; the below-barrier form has
/// `m21 = conj(m12)` and unit determinant.
pub fn limit_matrix(cfg: &SystemConfig, e: f64) -> Result<TransferMatrix2> {
    let sp = shape_params(cfg, e)?;
    Ok(limit_matrix_from(&sp))
}

pub fn limit_matrix_from(sp: &ShapeParams) -> TransferMatrix2 {
    let (cos, sinc) = sp.cos_sinc();
    let i = Complex64::i();
    let back = Complex64::from_polar(1.0, -sp.z);
    let fwd = Complex64::from_polar(1.0, sp.z);
    let m11 = back * Complex64::new(cos, sp.f * sinc);
    let m22 = fwd * Complex64::new(cos, -sp.f * sinc);
    let ds = sp.d * sinc;
    let (m12, m21) = match sp.regime {
        Regime::Above => (i * back * ds, -fwd * ds),
        Regime::Below => (-i * back * ds, i * fwd * ds),
    };
    TransferMatrix2::new(m11, m12, m21, m22)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenStructure {
    /// Principal phase in (−π, π].
    pub kappa: f64,
    /// `1 + d² sin²φ/φ²`
    pub tau: f64,
    pub lambda1: Complex64,
    pub lambda2: Complex64,
}

impl EigenStructure {
    /// `τ cos(φ − κ)`, half the eigenvalue sum.
    pub fn half_trace(&self) -> f64 {
        ((self.lambda1 + self.lambda2) / 2.0).re
    }

    pub fn on_unit_circle(&self) -> bool {
        self.half_trace().abs() <= 1.0
    }
}

/// Phase `κ`, amplitude `τ` and the eigenvalue pair `τcos(φ−κ) ± √(τ²cos²(φ−κ) − 1)`.
///
/// The larger-magnitude root of a real pair is formed directly and the other
/// as its reciprocal, so `λ₁λ₂ = 1` survives large `τ`.
pub fn eigen_structure(sp: &ShapeParams) -> Result<EigenStructure> {
    if !sp.phi_is_real() {
        return Err(Error::ImaginaryPhase { phi_sq: sp.phi_sq });
    }
    let (cos, sinc) = sp.cos_sinc();
    let mut kappa = (sp.f * sinc).atan2(cos);
    if kappa <= -PI {
        kappa = PI;
    }
    let tau = 1.0 + sp.d * sp.d * sinc * sinc;
    let x = tau * (sp.phi.re - kappa).cos();
    let (lambda1, lambda2) = if x.abs() <= 1.0 {
        let s = (1.0 - x * x).sqrt();
        (Complex64::new(x, s), Complex64::new(x, -s))
    } else {
        let s = (x * x - 1.0).sqrt();
        let big = x + x.signum() * s;
        let small = 1.0 / big;
        if x > 0.0 {
            (Complex64::new(big, 0.0), Complex64::new(small, 0.0))
        } else {
            (Complex64::new(small, 0.0), Complex64::new(big, 0.0))
        }
    };
    Ok(EigenStructure {
        kappa,
        tau,
        lambda1,
        lambda2,
    })
}

/// `cos κ` from the tangent form `1/√(1 + f² tan²φ/φ²)`.
///
/// Dividing through by `cos φ` drops its sign, which is restored here so the
/// value matches the real part of the unit phasor `e^{iκ}`.
pub fn cos_kappa_from_tangent(sp: &ShapeParams) -> Result<f64> {
    if !sp.phi_is_real() {
        return Err(Error::ImaginaryPhase { phi_sq: sp.phi_sq });
    }
    let (cos, sinc) = sp.cos_sinc();
    if cos == 0.0 {
        return Ok(0.0);
    }
    let t = sp.f * sinc / cos;
    Ok(cos.signum() / (1.0 + t * t).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn geometry_examples() {
        let g = derive_geometry(100.0, 0.2).unwrap();
        assert!(close(g.a, 83.333_333_333_333_33, 1e-14));
        assert!(close(g.b, 16.666_666_666_666_67, 1e-14));
        let g = derive_geometry(15.0, 3.0).unwrap();
        assert_eq!((g.a, g.b), (3.75, 11.25));
        let g = derive_geometry(1.0, 1.0).unwrap();
        assert_eq!((g.a, g.b), (0.5, 0.5));
    }

    #[test]
    fn geometry_rejects_nonpositive() {
        assert!(matches!(derive_geometry(0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(derive_geometry(1.0, -0.5), Err(Error::Domain(_))));
        assert!(SystemConfig::new(-1.0, 1.0, 1.0, Regime::Above).is_err());
    }

    #[test]
    fn wavenumber_examples() {
        let w = wavenumbers(16.0, 15.0, Regime::Above).unwrap();
        assert_eq!((w.k, w.q, w.xi, w.eta), (4.0, 1.0, 4.25, -3.75));

        let w = wavenumbers(11.0, 15.0, Regime::Below).unwrap();
        assert!(close(w.k, 3.316_624_790_355_4, 1e-12));
        assert_eq!(w.q, 2.0);
        assert!(close(w.xi, 2.261_335_084_333, 1e-12));
        assert!(close(w.eta, -1.055_289_706_022, 1e-12));

        for r in [Regime::Above, Regime::Below] {
            assert!(matches!(
                wavenumbers(15.0, 15.0, r),
                Err(Error::Singular { .. })
            ));
        }
        assert!(matches!(
            wavenumbers(11.0, 15.0, Regime::Above),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            wavenumbers(16.0, 15.0, Regime::Below),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn shape_param_examples() {
        let cfg = SystemConfig::new(8.0, 2.0, 1.0, Regime::Below).unwrap();
        let sp = shape_params(&cfg, 6.0).unwrap();
        assert!(close(sp.phi_sq, 8.0, 1e-12));
        assert!(close(sp.phi.re, 2.828_427_124_746_19, 1e-12));

        let cfg = SystemConfig::new(15.0, 1.0, 1.0, Regime::Above).unwrap();
        let sp = shape_params(&cfg, 16.0).unwrap();
        assert_eq!(sp.z, 4.0);

        // E = V/(1+c) is the branch point.
        let cfg = SystemConfig::new(15.0, 2.0, 0.5, Regime::Below).unwrap();
        let sp = shape_params(&cfg, 10.0).unwrap();
        assert!(sp.phi_sq.abs() < 1e-12);
    }

    #[test]
    fn imaginary_phi_below_branch_point() {
        let cfg = SystemConfig::new(15.0, 1.0, 1.0, Regime::Below).unwrap();
        let sp = shape_params(&cfg, 5.0).unwrap();
        assert!(sp.phi_sq < 0.0);
        assert_eq!(sp.phi.re, 0.0);
        assert!(close(sp.phi.im * sp.phi.im, -sp.phi_sq, 1e-12));
        assert!(matches!(
            eigen_structure(&sp),
            Err(Error::ImaginaryPhase { .. })
        ));
    }

    /// Second evaluation path: entries written out with complex `sin`/`cos`
    /// of `φ` instead of the even-function route through `φ²`.
    fn limit_matrix_direct(sp: &ShapeParams) -> TransferMatrix2 {
        let i = Complex64::i();
        let phi = sp.phi;
        let s = phi.sin() / phi;
        let c = phi.cos();
        let ez = (i * sp.z).exp();
        let emz = (-i * sp.z).exp();
        match sp.regime {
            Regime::Above => TransferMatrix2::new(
                emz * (c + i * sp.f * s),
                i * emz * sp.d * s,
                -ez * sp.d * s,
                ez * (c - i * sp.f * s),
            ),
            Regime::Below => TransferMatrix2::new(
                emz * (c + i * sp.f * s),
                -i * emz * sp.d * s,
                i * ez * sp.d * s,
                ez * (c - i * sp.f * s),
            ),
        }
    }

    #[test]
    fn limit_matrix_matches_direct_substitution() {
        let cfg = SystemConfig::new(15.0, 1.0, 1.0, Regime::Above).unwrap();
        let sp = shape_params(&cfg, 16.0).unwrap();
        let m = limit_matrix(&cfg, 16.0).unwrap();
        assert!(m.frobenius_distance(&limit_matrix_direct(&sp)) < 1e-12);

        let cfg = SystemConfig::new(15.0, 1.0, 1.0, Regime::Below).unwrap();
        for e in [4.0, 9.0, 14.0] {
            let sp = shape_params(&cfg, e).unwrap();
            let m = limit_matrix(&cfg, e).unwrap();
            assert!(m.frobenius_distance(&limit_matrix_direct(&sp)) < 1e-10 * m.max_abs());
        }
    }

    #[test]
    fn limit_matrix_conjugate_structure() {
        let cfg = SystemConfig::new(15.0, 1.3, 0.7, Regime::Above).unwrap();
        let m = limit_matrix(&cfg, 18.5).unwrap();
        assert!((m.m22 - m.m11.conj()).norm() < 1e-14);
        assert!((m.m21 + Complex64::i() * m.m12.conj()).norm() < 1e-14);

        let cfg = cfg.with_regime(Regime::Below);
        let m = limit_matrix(&cfg, 12.0).unwrap();
        assert!((m.m22 - m.m11.conj()).norm() < 1e-14);
        assert!((m.m21 - m.m12.conj()).norm() < 1e-14);
        assert!((m.det() - 1.0).norm() < 1e-12);
    }

    #[test]
    fn above_barrier_determinant_open_question() {
        let cfg = SystemConfig::new(15.0, 1.0, 1.0, Regime::Above).unwrap();
        let sp = shape_params(&cfg, 16.0).unwrap();
        let (_, sinc) = sp.cos_sinc();
        let ds2 = sp.d * sp.d * sinc * sinc;
        let det = limit_matrix_from(&sp).det();
        assert!((det - Complex64::new(1.0 + ds2, ds2)).norm() < 1e-12);
    }

    #[test]
    fn limit_matrix_at_branch_point() {
        // φ = 0 exactly: m11 = e^{−iz}(1 + if), m12 = i e^{−iz} d.
        let cfg = SystemConfig::new(15.0, 2.0, 0.5, Regime::Below).unwrap();
        let mut sp = shape_params(&cfg, 10.0).unwrap();
        sp.phi_sq = 0.0;
        sp.phi = Complex64::new(0.0, 0.0);
        let m = limit_matrix_from(&sp);
        let emz = Complex64::from_polar(1.0, -sp.z);
        assert!((m.m11 - emz * Complex64::new(1.0, sp.f)).norm() < 1e-14);
        assert!((m.m12 + Complex64::i() * emz * sp.d).norm() < 1e-14);

        let mut sp_above = sp;
        sp_above.regime = Regime::Above;
        let m = limit_matrix_from(&sp_above);
        assert!((m.m12 - Complex64::i() * emz * sp.d).norm() < 1e-14);
    }

    #[test]
    fn limit_matrix_continuous_through_zero_phase() {
        for phi_sq in [1e-16, -1e-16] {
            let (c0, s0) = cos_sinc(0.0);
            let (c1, s1) = cos_sinc(phi_sq);
            assert!((c0 - c1).abs() < 1e-6 && (s0 - s1).abs() < 1e-6);
        }
        let phi: f64 = 1.1e-4;
        let (_, series) = cos_sinc(phi * phi);
        assert!((series - phi.sin() / phi).abs() < 1e-15);
    }

    #[test]
    fn eigen_examples() {
        let cfg = SystemConfig::new(15.0, 1.0, 1.0, Regime::Above).unwrap();
        let mut sp = shape_params(&cfg, 16.0).unwrap();
        sp.d = 0.0;
        let es = eigen_structure(&sp).unwrap();
        assert_eq!(es.tau, 1.0);
        assert!((es.lambda1.norm() - 1.0).abs() < 1e-12);
        assert!((es.lambda2.norm() - 1.0).abs() < 1e-12);

        // f = 0, φ = π/2 → κ = 0.
        let mut sp = shape_params(&cfg, 16.0).unwrap();
        sp.f = 0.0;
        sp.phi_sq = (PI / 2.0).powi(2);
        sp.phi = Complex64::new(PI / 2.0, 0.0);
        let es = eigen_structure(&sp).unwrap();
        assert!(es.kappa.abs() < 1e-15);
        assert!((cos_kappa_from_tangent(&sp).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eigen_product_is_one_for_large_tau() {
        let cfg = SystemConfig::new(15.0, 100.0, 0.2, Regime::Above).unwrap();
        let sp = shape_params(&cfg, 15.2).unwrap();
        let es = eigen_structure(&sp).unwrap();
        assert!((es.lambda1 * es.lambda2 - 1.0).norm() < 1e-12);
        let sum = es.lambda1 + es.lambda2;
        let expected = 2.0 * es.tau * (sp.phi.re - es.kappa).cos();
        assert!((sum.re - expected).abs() <= 1e-12 * expected.abs().max(1.0));
    }
}
