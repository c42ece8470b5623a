//! Reflection from arrays of multi-channel point scatterers.
//!
//! A scatterer of length `l` with `N` internal channels reflects with
//! amplitude `R = (1 − N²)/(N² + 2iN·cot(kl) + 1)`. For `kl ≪ 1` and
//! `N² ≫ 1` this tends to `−(1 + 2i/(kβ))⁻¹` with `β = N·l`, which goes to
//! `−1` for an unbounded system (`kβ → ∞`) and to `0` for a bounded one
//! where `n ≫ N` scatterers share a finite length (`β = NL/n → 0`).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// `kl` must stay below this for the limit form to apply.
pub const DEFAULT_MAX_KL: f64 = 0.01;
/// Smallest channel count for which `N² ≫ 1` is taken to hold.
pub const DEFAULT_MIN_CHANNELS: u32 = 10;

/// `kβ` below this is transmission-dominated.
pub const TRANSMISSION_KBETA: f64 = 0.1;
/// `kβ` above this is reflection-dominated.
pub const REFLECTION_KBETA: f64 = 10.0;

/// `|sin(kl)|` below this is treated as a pole of `cot(kl)`.
const COT_POLE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactReflection {
    pub amplitude: Complex64,
    /// `sin(kl) = 0`: the denominator diverges and the amplitude is 0.
    pub at_pole: bool,
}

/// Single-scatterer amplitude, evaluated as
/// `(1 − N²)·sin(kl) / ((N² + 1)·sin(kl) + 2iN·cos(kl))` to stay finite near poles.
pub fn reflection_exact(channels: u32, k: f64, l: f64) -> ExactReflection {
    let n = channels as f64;
    let (s, c) = (k * l).sin_cos();
    if s.abs() < COT_POLE_EPS {
        return ExactReflection {
            amplitude: Complex64::new(0.0, 0.0),
            at_pole: true,
        };
    }
    let num = (1.0 - n * n) * s;
    let den = Complex64::new((n * n + 1.0) * s, 2.0 * n * c);
    ExactReflection {
        amplitude: num / den,
        at_pole: false,
    }
}

/// `−(1 + 2i/(kβ))⁻¹ = −kβ/(kβ + 2i)`; zero at `kβ = 0`.
pub fn reflection_limit(beta: f64, k: f64) -> Complex64 {
    let kb = k * beta;
    if kb == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    -Complex64::new(kb, 0.0) / Complex64::new(kb, 2.0)
}

/// `1 − |R|²`.
pub fn transmission_probability(r: Complex64) -> f64 {
    (1.0 - r.norm_sqr()).clamp(0.0, 1.0)
}

/// Relative deviation allowed between exact and limit amplitudes.
pub fn limit_error_bound(channels: u32, k: f64, l: f64) -> f64 {
    let n = channels as f64;
    5.0 * (k * l).abs().max(1.0 / (n * n))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiChannelSpec {
    /// Channels per scatterer `N`.
    pub channels: u32,
    /// Scatterer count `n`; `None` for an unbounded array.
    pub scatterers: Option<u64>,
    /// Total length `L`; `None` for an unbounded array.
    pub length: Option<f64>,
    pub k: f64,
    /// Length per scatterer.
    pub l: f64,
    /// `β = N·l`.
    pub beta: f64,
}

impl MultiChannelSpec {
    /// `n` scatterers sharing a total length `length`: `l = L/n`, `β = NL/n`.
    pub fn bounded(channels: u32, scatterers: u64, length: f64, k: f64) -> Result<Self> {
        check_common(channels, k)?;
        if scatterers == 0 {
            return Err(Error::Domain("need at least one scatterer".into()));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::Domain(format!("length must be > 0, got {length}")));
        }
        let l = length / scatterers as f64;
        Ok(Self {
            channels,
            scatterers: Some(scatterers),
            length: Some(length),
            k,
            l,
            beta: channels as f64 * l,
        })
    }

    /// Unbounded array characterised by `β` alone: `l = β/N`.
    pub fn unbounded(channels: u32, beta: f64, k: f64) -> Result<Self> {
        check_common(channels, k)?;
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::Domain(format!("beta must be > 0, got {beta}")));
        }
        Ok(Self {
            channels,
            scatterers: None,
            length: None,
            k,
            l: beta / channels as f64,
            beta,
        })
    }

    pub fn k_beta(&self) -> f64 {
        self.k * self.beta
    }

    pub fn kl(&self) -> f64 {
        self.k * self.l
    }

    /// Both approximations behind the limit form hold.
    pub fn guards_hold(&self) -> bool {
        self.kl() < DEFAULT_MAX_KL && self.channels >= DEFAULT_MIN_CHANNELS
    }
}

fn check_common(channels: u32, k: f64) -> Result<()> {
    if channels == 0 {
        return Err(Error::Domain("need at least one channel".into()));
    }
    if !(k.is_finite() && k >= 0.0) {
        return Err(Error::Domain(format!("wavenumber must be >= 0, got {k}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeClass {
    TransmissionDominated,
    Intermediate,
    ReflectionDominated,
}

impl RegimeClass {
    pub fn from_k_beta(kb: f64) -> Self {
        if kb < TRANSMISSION_KBETA {
            RegimeClass::TransmissionDominated
        } else if kb > REFLECTION_KBETA {
            RegimeClass::ReflectionDominated
        } else {
            RegimeClass::Intermediate
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RegimeClass::TransmissionDominated => "transmission-dominated",
            RegimeClass::Intermediate => "intermediate",
            RegimeClass::ReflectionDominated => "reflection-dominated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub spec: MultiChannelSpec,
    pub k_beta: f64,
    pub class: RegimeClass,
    pub exact: ExactReflection,
    pub limit: Complex64,
    pub exact_probability: f64,
    pub limit_probability: f64,
    /// `|R_exact − R_limit| / |R_limit|` (absolute when the limit vanishes).
    pub discrepancy: f64,
    pub error_bound: f64,
    pub guards_hold: bool,
}

pub fn bounded_regime_check(spec: &MultiChannelSpec) -> RegimeReport {
    let exact = reflection_exact(spec.channels, spec.k, spec.l);
    let limit = reflection_limit(spec.beta, spec.k);
    let diff = (exact.amplitude - limit).norm();
    let scale = limit.norm();
    RegimeReport {
        spec: *spec,
        k_beta: spec.k_beta(),
        class: RegimeClass::from_k_beta(spec.k_beta()),
        exact,
        limit,
        exact_probability: exact.amplitude.norm_sqr(),
        limit_probability: limit.norm_sqr(),
        discrepancy: if scale > 0.0 { diff / scale } else { diff },
        error_bound: limit_error_bound(spec.channels, spec.k, spec.l),
        guards_hold: spec.guards_hold(),
    }
}
