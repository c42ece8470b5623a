//! Spectral analysis of the bounded one-dimensional multibarrier potential.
//!
//! A bounded array of identical rectangular barriers of height `V` spans a
//! total length `L`; the ratio `c` of total interval length to total barrier
//! width fixes the geometry. In the dense limit the array is described by a
//! closed-form 2×2 transfer matrix whose eigen-phase `κ` ties to the energy
//! through a transcendental dispersion relation.
//!
//! The crate is split into:
//!
//! - [`model`]: configuration, wavenumbers, shape parameters, limit transfer
//!   matrices and their eigen-structure.
//! - [`dispersion`]: the dispersion relation, closed-form allowed energies,
//!   bracketing root solver and band/gap scans.
//! - [`chain`]: explicit finite products of per-barrier matrices, used as an
//!   independent oracle for the dense limit.
//! - [`multichannel`]: reflection from multi-channel point scatterers and its
//!   bounded / unbounded limits.
//!
//! Units follow ħ = 1, m = 1/2, so `k = √E`.

pub mod chain;
pub mod dispersion;
mod error;
pub mod model;
pub mod multichannel;

pub use error::{Error, Result};
pub use model::{Regime, SystemConfig, TransferMatrix2};
