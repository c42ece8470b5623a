//! Closed-form allowed energies at special `κ`, their admissibility
//! inequalities, the large-`c` linear regime and the small-`c` plateau.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Regime, SystemConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpecialKappa {
    /// `κ = ±(2N+1)π/2`
    HalfOdd,
    /// `κ = ±Nπ`
    IntegerPi,
}

impl SpecialKappa {
    /// `(2N+1)π/2` or `Nπ`.
    pub fn phase(self, n: u32) -> f64 {
        match self {
            SpecialKappa::HalfOdd => (2 * n + 1) as f64 * PI / 2.0,
            SpecialKappa::IntegerPi => n as f64 * PI,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SpecialKappa::HalfOdd => "half-odd",
            SpecialKappa::IntegerPi => "integer-pi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum KappaClass {
    Special(SpecialKappa, Sign),
    /// `Nπ ± κ` in the large-`c` linear regime.
    Linear {
        kappa: f64,
        sign: Sign,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub admissible: bool,
    /// The condition that failed, written out.
    pub failed: Option<String>,
}

impl Admissibility {
    fn check(conditions: &[(bool, String)]) -> Self {
        match conditions.iter().find(|(ok, _)| !ok) {
            Some((_, what)) => Admissibility {
                admissible: false,
                failed: Some(what.clone()),
            },
            None => Admissibility {
                admissible: true,
                failed: None,
            },
        }
    }
}

/// Evaluates the regime's inequality for the energy family `class` at index `n`.
///
/// Above the barrier the energy `x/L² + V/(1+c)` must exceed `V`; below it
/// must stay under `V`, and minus-sign families must keep `E > 0`.
pub fn admissible(class: KappaClass, n: u32, cfg: &SystemConfig) -> Admissibility {
    let (v, c, l2) = (cfg.v, cfg.c, cfg.l * cfg.l);
    let e0 = cfg.branch_point();
    match (cfg.regime, class) {
        (Regime::Above, KappaClass::Special(SpecialKappa::HalfOdd, _)) => {
            Admissibility::check(&[(
                (2 * n + 1) as f64 * (1.0 + c) * PI / (2.0 * c * l2) > v,
                "(2N+1)(1+c)π/(2cL²) > V".into(),
            )])
        }
        (Regime::Above, KappaClass::Special(SpecialKappa::IntegerPi, _)) => {
            Admissibility::check(&[(
                n as f64 * (1.0 + c) * PI / (c * l2) > v,
                "N(1+c)π/(cL²) > V".into(),
            )])
        }
        (Regime::Above, KappaClass::Linear { kappa, sign }) => {
            let x = n as f64 * PI + sign.value() * kappa;
            Admissibility::check(&[(x > cfg.barrier_argument(), "Nπ ± κ > VL²c/(1+c)".into())])
        }
        (Regime::Below, KappaClass::Special(kind, Sign::Plus)) => {
            let lhs = match kind {
                SpecialKappa::HalfOdd => (2 * n + 1) as f64 * (1.0 + c) * PI / (2.0 * c * l2),
                SpecialKappa::IntegerPi => n as f64 * (1.0 + c) * PI / (c * l2),
            };
            let what = match kind {
                SpecialKappa::HalfOdd => "(2N+1)(1+c)π/(2cL²) < V",
                SpecialKappa::IntegerPi => "N(1+c)π/(cL²) < V",
            };
            Admissibility::check(&[(lhs < v, what.into())])
        }
        (Regime::Below, KappaClass::Special(kind, Sign::Minus)) => {
            let lhs = match kind {
                SpecialKappa::HalfOdd => (2 * n + 1) as f64 * (1.0 + c) * PI / (2.0 * c * l2),
                SpecialKappa::IntegerPi => n as f64 * (1.0 + c) * PI / (c * l2),
            };
            let (what, side) = match kind {
                SpecialKappa::HalfOdd => ("−(2N+1)(1+c)π/(2cL²) < V", "(2N+1)π/(2L²) < V/(1+c)"),
                SpecialKappa::IntegerPi => ("−N(1+c)π/(cL²) < V", "Nπ/L² < V/(1+c)"),
            };
            Admissibility::check(&[
                (-lhs < v, what.into()),
                (kind.phase(n) / l2 < e0, side.into()),
            ])
        }
        (Regime::Below, KappaClass::Linear { kappa, sign }) => {
            let x = n as f64 * PI + sign.value() * kappa;
            Admissibility::check(&[
                (x > 0.0, "Nπ ± κ > 0".into()),
                (
                    (1.0 + c) * x / (l2 * c) < v,
                    "(1+c)(Nπ ± κ)/(L²c) < V".into(),
                ),
            ])
        }
    }
}

/// Closed-form energy at `κ = ±(2N+1)π/2` or `κ = ±Nπ`, present only when admissible.
///
/// Above the barrier both signs give `E = x/L² + V/(1+c)`; below it the
/// minus sign gives `E = −x/L² + V/(1+c)`.
pub fn special_energies(kind: SpecialKappa, sign: Sign, n: u32, cfg: &SystemConfig) -> Option<f64> {
    let rec = special_energy_record(kind, sign, n, cfg);
    rec.admissibility.admissible.then_some(rec.energy)
}

/// A closed-form energy with its admissibility verdict and interval flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecialEnergy {
    pub kind: SpecialKappa,
    pub sign: Sign,
    pub n: u32,
    pub energy: f64,
    pub admissibility: Admissibility,
    /// Below the barrier: the energy is not inside the open interval `(V/(1+c), V)`.
    pub outside_allowed_interval: bool,
}

pub fn special_energy_record(
    kind: SpecialKappa,
    sign: Sign,
    n: u32,
    cfg: &SystemConfig,
) -> SpecialEnergy {
    let x = kind.phase(n) / (cfg.l * cfg.l);
    let e0 = cfg.branch_point();
    let energy = match cfg.regime {
        Regime::Above => x + e0,
        Regime::Below => sign.value() * x + e0,
    };
    let outside_allowed_interval = cfg.regime == Regime::Below && !(energy > e0 && energy < cfg.v);
    SpecialEnergy {
        kind,
        sign,
        n,
        energy,
        admissibility: admissible(KappaClass::Special(kind, sign), n, cfg),
        outside_allowed_interval,
    }
}

/// `E = (Nπ ± κ)/L² + V/(1+c)`: the root of `tan²κ = tan²(L²(E − V/(1+c)))`,
/// which approximates the full relation when `g ≈ 1` (large `c`).
pub fn linear_regime_energy(kappa: f64, n: u32, sign: Sign, cfg: &SystemConfig) -> Option<f64> {
    let class = KappaClass::Linear { kappa, sign };
    if !admissible(class, n, cfg).admissible {
        return None;
    }
    let x = n as f64 * PI + sign.value() * kappa;
    Some(x / (cfg.l * cfg.l) + cfg.branch_point())
}

/// The constant-energy plateau for small `c`: `E ≈ V` above the barrier,
/// `E ≈ V/(1+c)` below it.
pub fn constant_energy_plateau(cfg: &SystemConfig, c_threshold: f64) -> Option<f64> {
    if cfg.c >= c_threshold {
        return None;
    }
    Some(match cfg.regime {
        Regime::Above => cfg.v,
        Regime::Below => cfg.branch_point(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(v: f64, l: f64, c: f64, regime: Regime) -> SystemConfig {
        SystemConfig::new(v, l, c, regime).unwrap()
    }

    #[test]
    fn half_odd_above_example() {
        let e = special_energies(
            SpecialKappa::HalfOdd,
            Sign::Plus,
            0,
            &cfg(1.0, 1.0, 1.0, Regime::Above),
        );
        assert!((e.unwrap() - (PI / 2.0 + 0.5)).abs() < 1e-15);
        assert!((e.unwrap() - 2.070_796_326_794_9).abs() < 1e-12);
    }

    #[test]
    fn integer_pi_below_minus_example() {
        let c = cfg(15.0, 1.0, 1.0, Regime::Below);
        let rec = special_energy_record(SpecialKappa::IntegerPi, Sign::Minus, 1, &c);
        assert!(rec.admissibility.admissible);
        assert!((rec.energy - (7.5 - PI)).abs() < 1e-15);
        assert!((rec.energy - 4.358_407_346_4).abs() < 1e-9);
        assert!(rec.outside_allowed_interval);
    }

    #[test]
    fn half_odd_above_large_l_is_absent() {
        let c = cfg(15.0, 100.0, 3.0, Regime::Above);
        let rec = special_energy_record(SpecialKappa::HalfOdd, Sign::Plus, 0, &c);
        assert!(!rec.admissibility.admissible);
        assert_eq!(
            rec.admissibility.failed.as_deref(),
            Some("(2N+1)(1+c)π/(2cL²) > V")
        );
        assert!(special_energies(SpecialKappa::HalfOdd, Sign::Plus, 0, &c).is_none());
    }

    #[test]
    fn admissibility_limits() {
        // Above, κ = Nπ, large L fails for fixed N.
        let big = cfg(15.0, 1e3, 1.0, Regime::Above);
        for n in 0..50 {
            assert!(
                !admissible(
                    KappaClass::Special(SpecialKappa::IntegerPi, Sign::Plus),
                    n,
                    &big
                )
                .admissible
            );
        }
        // Below, plus sign, very small L fails.
        let small = cfg(15.0, 1e-2, 1.0, Regime::Below);
        for kind in [SpecialKappa::HalfOdd, SpecialKappa::IntegerPi] {
            for n in 1..20 {
                assert!(!admissible(KappaClass::Special(kind, Sign::Plus), n, &small).admissible);
            }
        }
        // Linear regime below, V = L = 15, c = 3, N = 0, κ = 1.
        let lin = cfg(15.0, 15.0, 3.0, Regime::Below);
        let class = KappaClass::Linear {
            kappa: 1.0,
            sign: Sign::Plus,
        };
        assert!(admissible(class, 0, &lin).admissible);
        assert!((4.0 / 675.0_f64 - 0.005_925_9).abs() < 1e-7);
    }

    #[test]
    fn threshold_value() {
        assert_eq!(
            cfg(15.0, 15.0, 3.0, Regime::Above).barrier_argument(),
            2531.25
        );
    }

    #[test]
    fn linear_regime_examples() {
        let c = cfg(15.0, 15.0, 3.0, Regime::Above);
        let e = linear_regime_energy(1.0, 806, Sign::Plus, &c).unwrap();
        assert!((e - ((806.0 * PI + 1.0) / 225.0 + 3.75)).abs() < 1e-13);
        assert!(e > 15.0 && (e - 15.008).abs() < 1e-3);
        // 805π + 1 < 2531.25
        assert!(linear_regime_energy(1.0, 805, Sign::Plus, &c).is_none());

        let below = cfg(15.0, 15.0, 3.0, Regime::Below);
        assert!(linear_regime_energy(0.0, 0, Sign::Plus, &below).is_none());
        assert!(linear_regime_energy(PI, 1, Sign::Minus, &below).is_none());
    }

    #[test]
    fn plateau_examples() {
        let above = cfg(15.0, 5.0, 0.01, Regime::Above);
        assert_eq!(constant_energy_plateau(&above, 0.05), Some(15.0));
        let below = above.with_regime(Regime::Below);
        assert_eq!(constant_energy_plateau(&below, 0.05), Some(15.0 / 1.01));
        let wide = cfg(15.0, 5.0, 2.0, Regime::Above);
        assert_eq!(constant_energy_plateau(&wide, 0.05), None);
    }
}
