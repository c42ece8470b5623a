//! κ-grid scans: spectra, bands, gaps and discontinuities.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::solver::EnergyGrid;
use super::{DispersionMode, EnergyWindow, SolverSettings, SpectrumSample};
use crate::{Result, SystemConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanMeta {
    pub mode: DispersionMode,
    /// Requested energy window.
    pub window: EnergyWindow,
    /// Window actually searched (below the barrier, `E ≤ V/(1+c)` is dropped).
    pub effective_window: Option<EnergyWindow>,
    pub energy_step: f64,
    pub grid_points: usize,
    pub kappa_points: usize,
    pub jump_threshold: f64,
}

/// Roots for every κ of a grid, in κ order then energy order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaScan {
    pub kappas: Vec<f64>,
    /// `roots[i]` holds the roots at `kappas[i]`.
    pub roots: Vec<Vec<SpectrumSample>>,
    pub meta: ScanMeta,
}

impl KappaScan {
    pub fn samples(&self) -> impl Iterator<Item = &SpectrumSample> {
        self.roots.iter().flatten()
    }

    pub fn sample_count(&self) -> usize {
        self.roots.iter().map(Vec::len).sum()
    }
}

/// A κ-interval with explicit endpoint closure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaInterval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl KappaInterval {
    pub fn contains(&self, k: f64) -> bool {
        let above = if self.lo_closed {
            k >= self.lo
        } else {
            k > self.lo
        };
        let below = if self.hi_closed {
            k <= self.hi
        } else {
            k < self.hi
        };
        above && below
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Energy discontinuity of one tangent period between neighbouring κ points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub kappa_left: f64,
    pub kappa_right: f64,
    pub energy_branch: i64,
    pub energy_left: f64,
    pub energy_right: f64,
}

impl Jump {
    pub fn size(&self) -> f64 {
        (self.energy_right - self.energy_left).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandGapReport {
    /// Closed κ-intervals (in grid points) where at least one root exists.
    pub bands: Vec<KappaInterval>,
    /// κ-intervals with no roots; open at every end shared with a band.
    pub gaps: Vec<KappaInterval>,
    pub jumps: Vec<Jump>,
    pub meta: ScanMeta,
}

/// Solves the dispersion relation at every κ in `kappas`.
///
/// The energy grid is built once and shared; κ points are processed in
/// parallel and merged back in input order.
pub fn scan_spectrum(
    cfg: &SystemConfig,
    kappas: &[f64],
    window: &EnergyWindow,
    mode: DispersionMode,
    settings: &SolverSettings,
    max_roots: usize,
) -> Result<KappaScan> {
    let grid = EnergyGrid::new(cfg, window, mode, settings)?;
    let roots = kappas
        .par_iter()
        .map(|&k| grid.roots(k, max_roots))
        .collect::<Result<Vec<_>>>()?;
    Ok(KappaScan {
        kappas: kappas.to_vec(),
        roots,
        meta: ScanMeta {
            mode,
            window: *window,
            effective_window: grid.effective_window(),
            energy_step: grid.step(),
            grid_points: grid.len(),
            kappa_points: kappas.len(),
            jump_threshold: settings.jump_fraction * window.width(),
        },
    })
}

pub fn scan_bands(
    cfg: &SystemConfig,
    kappas: &[f64],
    window: &EnergyWindow,
    mode: DispersionMode,
    settings: &SolverSettings,
) -> Result<BandGapReport> {
    Ok(BandGapReport::from_scan(&scan_spectrum(
        cfg,
        kappas,
        window,
        mode,
        settings,
        usize::MAX,
    )?))
}

impl BandGapReport {
    /// Classifies a scan. `kappas` is expected in ascending order.
    pub fn from_scan(scan: &KappaScan) -> Self {
        let ks = &scan.kappas;
        let mut bands = Vec::new();
        let mut gaps = Vec::new();
        let mut i = 0;
        while i < ks.len() {
            let has = !scan.roots[i].is_empty();
            let mut j = i;
            while j + 1 < ks.len() && !scan.roots[j + 1].is_empty() == has {
                j += 1;
            }
            if has {
                bands.push(KappaInterval {
                    lo: ks[i],
                    hi: ks[j],
                    lo_closed: true,
                    hi_closed: true,
                });
            } else {
                // A gap reaches out to the neighbouring band points, exclusive.
                let (lo, lo_closed) = if i == 0 {
                    (ks[0], true)
                } else {
                    (ks[i - 1], false)
                };
                let (hi, hi_closed) = if j + 1 == ks.len() {
                    (ks[j], true)
                } else {
                    (ks[j + 1], false)
                };
                gaps.push(KappaInterval {
                    lo,
                    hi,
                    lo_closed,
                    hi_closed,
                });
            }
            i = j + 1;
        }

        let threshold = scan.meta.jump_threshold;
        let mut jumps = Vec::new();
        for w in 0..ks.len().saturating_sub(1) {
            let left = extremes_by_branch(&scan.roots[w]);
            let right = extremes_by_branch(&scan.roots[w + 1]);
            for (branch, (l_lo, l_hi)) in &left {
                let Some((r_lo, r_hi)) = right.get(branch) else {
                    continue;
                };
                let (el, er) = if (r_lo - l_lo).abs() >= (r_hi - l_hi).abs() {
                    (*l_lo, *r_lo)
                } else {
                    (*l_hi, *r_hi)
                };
                if (er - el).abs() > threshold {
                    jumps.push(Jump {
                        kappa_left: ks[w],
                        kappa_right: ks[w + 1],
                        energy_branch: *branch,
                        energy_left: el,
                        energy_right: er,
                    });
                }
            }
        }

        Self {
            bands,
            gaps,
            jumps,
            meta: scan.meta,
        }
    }

    /// Whether every κ-interval `[start, start+width)` inside the scanned
    /// range intersects a gap.
    pub fn gaps_recur(&self, width: f64) -> bool {
        let (Some(first), Some(last)) = (
            self.bands
                .iter()
                .chain(&self.gaps)
                .map(|i| i.lo)
                .reduce(f64::min),
            self.bands
                .iter()
                .chain(&self.gaps)
                .map(|i| i.hi)
                .reduce(f64::max),
        ) else {
            return false;
        };
        let mut start = first;
        while start + width <= last + 1e-12 {
            let end = start + width;
            if !self.gaps.iter().any(|g| g.hi > start && g.lo < end) {
                return false;
            }
            start = end;
        }
        true
    }
}

fn extremes_by_branch(roots: &[SpectrumSample]) -> BTreeMap<i64, (f64, f64)> {
    let mut out: BTreeMap<i64, (f64, f64)> = BTreeMap::new();
    for r in roots {
        out.entry(r.energy_branch)
            .and_modify(|(lo, hi)| {
                *lo = lo.min(r.energy);
                *hi = hi.max(r.energy);
            })
            .or_insert((r.energy, r.energy));
    }
    out
}
