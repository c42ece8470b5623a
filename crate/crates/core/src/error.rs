use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// E = V: the inside wavenumber vanishes and ξ, η diverge.
    #[error("energy {energy} coincides with barrier height {barrier}")]
    Singular { energy: f64, barrier: f64 },

    #[error("window [{lo}, {hi}] touches the E = V exclusion band around {barrier}")]
    PoleBand { lo: f64, hi: f64, barrier: f64 },

    /// E(1+c) = V: the dispersion coefficient has a pole.
    #[error("dispersion coefficient has a pole at E = {energy}")]
    CoefficientPole { energy: f64 },

    /// Below-barrier energy with E ≤ V/(1+c): no real solution exists there.
    #[error("energy {energy} is excluded: allowed below-barrier energies satisfy E > {lower}")]
    ExcludedEnergy { energy: f64, lower: f64 },

    #[error("imaginary phase (φ² = {phi_sq}): eigen-structure needs E > V/(1+c)")]
    ImaginaryPhase { phi_sq: f64 },

    #[error("empty energy window [{lo}, {hi}]")]
    EmptyWindow { lo: f64, hi: f64 },

    #[error("root grid would need {needed} points (limit {limit}); narrow the window or the branch range")]
    GridTooCoarse { needed: usize, limit: usize },

    #[error("approximation guard violated: {0}")]
    GuardViolated(String),

    #[error("root at E = {energy} has residual {residual:e} above tolerance {tolerance:e}")]
    Residual {
        energy: f64,
        residual: f64,
        tolerance: f64,
    },
}
