//! The five subcommands. Each writes its files under `RunConfig::out` and
//! returns what it wrote.

use std::path::PathBuf;

use mbspec::chain::{convergence_report, ConvergenceReport, TrendSummary};
use mbspec::dispersion::{
    branch_window_energies, clip_to_regime, cos2_kappa, scan_spectrum, special_energy_record,
    tangent_argument, BandGapReport, BranchWindow, EnergyWindow, Jump, KappaInterval, KappaScan,
    ScanMeta, Sign, SpecialKappa, SpectrumSample,
};
use mbspec::multichannel::{bounded_regime_check, MultiChannelSpec, RegimeReport};
use mbspec::{Error, Regime, SystemConfig};
use serde::Serialize;

use crate::config::{OutputFormat, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, format_c, write_csv, write_csv_header, write_json};

pub const SPECTRUM_HEADER: [&str; 7] = [
    "kappa",
    "E",
    "branch_N",
    "multiplicity",
    "mode",
    "regime",
    "flags",
];

#[derive(Debug, Clone, Default)]
pub struct CommandOutput {
    pub files: Vec<PathBuf>,
    /// One line per run, for the terminal.
    pub summary: Vec<String>,
}

/// One value of `c`: the window actually scanned, the samples and their band/gap structure.
#[derive(Debug, Clone)]
pub struct SpectrumRun {
    pub c: f64,
    pub cfg: SystemConfig,
    pub requested_window: Option<EnergyWindow>,
    pub scan: KappaScan,
    pub report: BandGapReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub kappa: f64,
    #[serde(rename = "E")]
    pub energy: f64,
    /// Tangent period of the root's energy.
    #[serde(rename = "branch_N")]
    pub branch: i64,
    pub multiplicity: u8,
    pub mode: &'static str,
    pub regime: &'static str,
    pub flags: String,
}

impl From<&SpectrumSample> for SpectrumRow {
    fn from(s: &SpectrumSample) -> Self {
        Self {
            kappa: s.kappa,
            energy: s.energy,
            branch: s.energy_branch,
            multiplicity: s.multiplicity,
            mode: s.mode.as_str(),
            regime: s.regime.as_str(),
            flags: s.flags.render(),
        }
    }
}

/// The window a run scans before clipping to the regime.
///
/// An explicit branch range wins (intersected with `e_window` if both are
/// given), then `e_window`, then `default_branch_count` periods starting at
/// the low end of the regime's domain.
pub fn requested_window(run: &RunConfig, cfg: &SystemConfig) -> CliResult<Option<EnergyWindow>> {
    let from_branches = |b: BranchWindow| {
        branch_window_energies(cfg, run.mode, b).ok_or_else(|| {
            CliError::Config(format!(
                "branch range {}:{} spans no energies",
                b.min, b.max
            ))
        })
    };
    match (run.branches, run.e_window) {
        (Some(b), w) => {
            let bw = from_branches(b)?;
            Ok(match w {
                Some(w) => bw.intersect(&w),
                None => Some(bw),
            })
        }
        (None, Some(w)) => {
            if !w.is_valid() {
                return Err(CliError::Config(format!(
                    "empty energy window {}:{}",
                    w.lo, w.hi
                )));
            }
            Ok(Some(w))
        }
        (None, None) => {
            let first = match cfg.regime {
                Regime::Above => {
                    let low = (cfg.v * (1.0 + run.settings.barrier_band)).max(f64::MIN_POSITIVE);
                    let arg = tangent_argument(cfg, low, run.mode)?;
                    (arg / std::f64::consts::PI).round() as i64
                }
                Regime::Below => 0,
            };
            from_branches(BranchWindow {
                min: first,
                max: first + run.default_branch_count - 1,
            })
            .map(Some)
        }
    }
}

fn empty_scan(kappas: &[f64], window: Option<EnergyWindow>, run: &RunConfig) -> KappaScan {
    KappaScan {
        kappas: kappas.to_vec(),
        roots: vec![Vec::new(); kappas.len()],
        meta: ScanMeta {
            mode: run.mode,
            window: window.unwrap_or(EnergyWindow::new(0.0, 0.0)),
            effective_window: None,
            energy_step: 0.0,
            grid_points: 0,
            kappa_points: kappas.len(),
            jump_threshold: 0.0,
        },
    }
}

/// Re-evaluates the dispersion relation at every sample.
pub fn verify_samples(run: &RunConfig, cfg: &SystemConfig, scan: &KappaScan) -> CliResult<()> {
    for s in scan.samples() {
        let c2 = cos2_kappa(cfg, s.energy, run.mode)?;
        let residual = (c2.value - s.kappa.cos().powi(2)).abs();
        if residual.is_nan() || residual >= run.settings.residual_tol {
            return Err(Error::Residual {
                energy: s.energy,
                residual,
                tolerance: run.settings.residual_tol,
            }
            .into());
        }
    }
    Ok(())
}

pub fn spectrum_run(run: &RunConfig, c: f64, kappas: &[f64]) -> CliResult<SpectrumRun> {
    let cfg = run.system(c)?;
    let requested = requested_window(run, &cfg)?;
    let clipped = requested.and_then(|w| clip_to_regime(&cfg, &w, &run.settings));
    let mut scan = match clipped {
        Some(w) => scan_spectrum(
            &cfg,
            kappas,
            &w,
            run.mode,
            &run.settings,
            run.max_roots.unwrap_or(usize::MAX),
        )?,
        None => empty_scan(kappas, requested, run),
    };
    for roots in &mut scan.roots {
        roots.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    }
    verify_samples(run, &cfg, &scan)?;
    let report = BandGapReport::from_scan(&scan);
    Ok(SpectrumRun {
        c,
        cfg,
        requested_window: requested,
        scan,
        report,
    })
}

pub fn spectrum_runs(run: &RunConfig) -> CliResult<Vec<SpectrumRun>> {
    let kappas = run.kappa_grid.points()?;
    run.c
        .iter()
        .map(|&c| spectrum_run(run, c, &kappas))
        .collect()
}

#[derive(Debug, Serialize)]
struct RunSummary<'a> {
    c: f64,
    file: Option<String>,
    requested_window: Option<EnergyWindow>,
    meta: &'a ScanMeta,
    samples: usize,
    bands: &'a [KappaInterval],
    gaps: &'a [KappaInterval],
    jump_count: usize,
}

#[derive(Debug, Serialize)]
struct Sidecar<'a, T: Serialize> {
    command: &'static str,
    config: &'a RunConfig,
    runs: T,
}

pub fn cmd_spectrum(run: &RunConfig) -> CliResult<CommandOutput> {
    let runs = spectrum_runs(run)?;
    ensure_dir(&run.out)?;
    let mut out = CommandOutput::default();
    let mut summaries = Vec::new();
    for r in &runs {
        let rows: Vec<SpectrumRow> = r.scan.samples().map(SpectrumRow::from).collect();
        let stem = format!("spectrum_c{}", format_c(r.c));
        let path = match run.format {
            OutputFormat::Csv => {
                let path = run.out.join(format!("{stem}.csv"));
                if rows.is_empty() {
                    write_csv_header(&path, &SPECTRUM_HEADER)?
                } else {
                    write_csv(&path, &rows)?
                }
            }
            OutputFormat::Json => write_json(&run.out.join(format!("{stem}.json")), &rows)?,
        };
        out.summary.push(format!(
            "c={}: {} samples, {} gaps -> {}",
            format_c(r.c),
            rows.len(),
            r.report.gaps.len(),
            path.display()
        ));
        summaries.push(RunSummary {
            c: r.c,
            file: path.file_name().map(|f| f.to_string_lossy().into_owned()),
            requested_window: r.requested_window,
            meta: &r.scan.meta,
            samples: rows.len(),
            bands: &r.report.bands,
            gaps: &r.report.gaps,
            jump_count: r.report.jumps.len(),
        });
        out.files.push(path);
    }
    let sidecar = Sidecar {
        command: "spectrum",
        config: run,
        runs: summaries,
    };
    out.files
        .push(write_json(&run.out.join("spectrum.json"), &sidecar)?);
    Ok(out)
}

#[derive(Debug, Serialize)]
struct BandsEntry<'a> {
    c: f64,
    requested_window: Option<EnergyWindow>,
    report: &'a BandGapReport,
}

#[derive(Debug, Serialize)]
struct IntervalRow {
    c: f64,
    kind: &'static str,
    kappa_lo: f64,
    kappa_hi: f64,
    lo_closed: bool,
    hi_closed: bool,
}

#[derive(Debug, Serialize)]
struct JumpRow {
    c: f64,
    kappa_left: f64,
    kappa_right: f64,
    #[serde(rename = "branch_N")]
    branch: i64,
    #[serde(rename = "E_left")]
    energy_left: f64,
    #[serde(rename = "E_right")]
    energy_right: f64,
}

impl JumpRow {
    fn new(c: f64, j: &Jump) -> Self {
        Self {
            c,
            kappa_left: j.kappa_left,
            kappa_right: j.kappa_right,
            branch: j.energy_branch,
            energy_left: j.energy_left,
            energy_right: j.energy_right,
        }
    }
}

pub fn cmd_bands(run: &RunConfig) -> CliResult<CommandOutput> {
    let runs = spectrum_runs(run)?;
    ensure_dir(&run.out)?;
    let mut out = CommandOutput::default();
    let entries: Vec<BandsEntry> = runs
        .iter()
        .map(|r| BandsEntry {
            c: r.c,
            requested_window: r.requested_window,
            report: &r.report,
        })
        .collect();
    for r in &runs {
        out.summary.push(format!(
            "c={}: {} bands, {} gaps, {} jumps",
            format_c(r.c),
            r.report.bands.len(),
            r.report.gaps.len(),
            r.report.jumps.len()
        ));
    }
    let sidecar = Sidecar {
        command: "bands",
        config: run,
        runs: entries,
    };
    out.files
        .push(write_json(&run.out.join("bands.json"), &sidecar)?);
    if run.format == OutputFormat::Csv {
        let mut intervals = Vec::new();
        let mut jumps = Vec::new();
        for r in &runs {
            let tagged = r
                .report
                .bands
                .iter()
                .map(|i| ("band", i))
                .chain(r.report.gaps.iter().map(|i| ("gap", i)));
            let mut rows: Vec<IntervalRow> = tagged
                .map(|(kind, i)| IntervalRow {
                    c: r.c,
                    kind,
                    kappa_lo: i.lo,
                    kappa_hi: i.hi,
                    lo_closed: i.lo_closed,
                    hi_closed: i.hi_closed,
                })
                .collect();
            rows.sort_by(|a, b| a.kappa_lo.total_cmp(&b.kappa_lo).then(a.kind.cmp(b.kind)));
            intervals.extend(rows);
            jumps.extend(r.report.jumps.iter().map(|j| JumpRow::new(r.c, j)));
        }
        let path = run.out.join("bands.csv");
        out.files.push(if intervals.is_empty() {
            write_csv_header(
                &path,
                &[
                    "c",
                    "kind",
                    "kappa_lo",
                    "kappa_hi",
                    "lo_closed",
                    "hi_closed",
                ],
            )?
        } else {
            write_csv(&path, &intervals)?
        });
        let path = run.out.join("jumps.csv");
        out.files.push(if jumps.is_empty() {
            write_csv_header(
                &path,
                &[
                    "c",
                    "kappa_left",
                    "kappa_right",
                    "branch_N",
                    "E_left",
                    "E_right",
                ],
            )?
        } else {
            write_csv(&path, &jumps)?
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergeRow {
    pub c: f64,
    pub n: usize,
    pub distance: f64,
    pub distance_left_edge: f64,
    pub distance_effective: Option<f64>,
    #[serde(rename = "T")]
    pub transmission: f64,
    #[serde(rename = "R")]
    pub reflection: f64,
}

pub fn convergence_reports(run: &RunConfig) -> CliResult<Vec<ConvergenceReport>> {
    let mut n_list = run.n_list.clone();
    n_list.sort_unstable();
    n_list.dedup();
    if n_list.is_empty() || n_list[0] == 0 {
        return Err(CliError::Config("n list must hold positive counts".into()));
    }
    if !(run.energy.is_finite() && run.energy > 0.0) {
        return Err(CliError::Config(format!(
            "energy must be > 0, got {}",
            run.energy
        )));
    }
    run.c
        .iter()
        .map(|&c| Ok(convergence_report(&run.system(c)?, run.energy, &n_list)?))
        .collect()
}

#[derive(Debug, Serialize)]
struct ConvergeEntry<'a> {
    c: f64,
    regime: Regime,
    energy: f64,
    limit: &'a mbspec::TransferMatrix2,
    trend: &'a TrendSummary,
}

pub fn cmd_converge(run: &RunConfig) -> CliResult<CommandOutput> {
    let reports = convergence_reports(run)?;
    ensure_dir(&run.out)?;
    let mut out = CommandOutput::default();
    let rows: Vec<ConvergeRow> = reports
        .iter()
        .flat_map(|rep| {
            rep.rows.iter().map(move |r| ConvergeRow {
                c: rep.cfg.c,
                n: r.n,
                distance: r.distance,
                distance_left_edge: r.distance_left_edge,
                distance_effective: r.distance_effective,
                transmission: r.transmission,
                reflection: r.reflection,
            })
        })
        .collect();
    for rep in &reports {
        let t = &rep.trend;
        out.summary.push(format!(
            "c={}: T {} -> {} (monotone from n={}, last step {:.3e})",
            format_c(rep.cfg.c),
            t.first_transmission,
            t.last_transmission,
            t.transmission_monotone_from,
            t.last_change
        ));
    }
    let entries: Vec<ConvergeEntry> = reports
        .iter()
        .map(|rep| ConvergeEntry {
            c: rep.cfg.c,
            regime: rep.cfg.regime,
            energy: rep.energy,
            limit: &rep.limit,
            trend: &rep.trend,
        })
        .collect();
    match run.format {
        OutputFormat::Csv => out
            .files
            .push(write_csv(&run.out.join("converge.csv"), &rows)?),
        OutputFormat::Json => out
            .files
            .push(write_json(&run.out.join("converge_rows.json"), &rows)?),
    }
    let sidecar = Sidecar {
        command: "converge",
        config: run,
        runs: entries,
    };
    out.files
        .push(write_json(&run.out.join("converge.json"), &sidecar)?);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultichannelRow {
    #[serde(rename = "N")]
    pub channels: u32,
    /// Empty for unbounded rows.
    pub n: Option<u64>,
    pub k: f64,
    pub l: f64,
    pub beta: f64,
    pub k_beta: f64,
    #[serde(rename = "Re_R")]
    pub re_r: f64,
    #[serde(rename = "Im_R")]
    pub im_r: f64,
    #[serde(rename = "abs_R2")]
    pub abs_r2: f64,
    #[serde(rename = "T_prob")]
    pub t_prob: f64,
    #[serde(rename = "Re_R_limit")]
    pub re_r_limit: f64,
    #[serde(rename = "Im_R_limit")]
    pub im_r_limit: f64,
    #[serde(rename = "abs_R2_limit")]
    pub abs_r2_limit: f64,
    pub discrepancy: f64,
    pub error_bound: f64,
    pub guards_hold: bool,
    pub class: &'static str,
    pub pole: bool,
}

impl From<&RegimeReport> for MultichannelRow {
    fn from(r: &RegimeReport) -> Self {
        Self {
            channels: r.spec.channels,
            n: r.spec.scatterers,
            k: r.spec.k,
            l: r.spec.l,
            beta: r.spec.beta,
            k_beta: r.k_beta,
            re_r: r.exact.amplitude.re,
            im_r: r.exact.amplitude.im,
            abs_r2: r.exact_probability,
            t_prob: 1.0 - r.exact_probability,
            re_r_limit: r.limit.re,
            im_r_limit: r.limit.im,
            abs_r2_limit: r.limit_probability,
            discrepancy: r.discrepancy,
            error_bound: r.error_bound,
            guards_hold: r.guards_hold,
            class: r.class.as_str(),
            pole: r.exact.at_pole,
        }
    }
}

/// Bounded rows `(N, n, k)` first, then unbounded rows `(N, β, k)`.
pub fn multichannel_rows(run: &RunConfig) -> CliResult<Vec<MultichannelRow>> {
    let m = &run.multichannel;
    let mut specs = Vec::new();
    for &n_ch in &m.channels {
        for &n in &m.scatterers {
            for &k in &m.k {
                specs.push(MultiChannelSpec::bounded(n_ch, n, m.length, k));
            }
        }
    }
    for &n_ch in &m.channels {
        for &beta in &m.beta {
            for &k in &m.beta_k {
                specs.push(MultiChannelSpec::unbounded(n_ch, beta, k));
            }
        }
    }
    specs
        .into_iter()
        .map(|s| {
            let s = s.map_err(|e| CliError::Config(e.to_string()))?;
            Ok(MultichannelRow::from(&bounded_regime_check(&s)))
        })
        .collect()
}

pub fn cmd_multichannel(run: &RunConfig) -> CliResult<CommandOutput> {
    let rows = multichannel_rows(run)?;
    ensure_dir(&run.out)?;
    let mut out = CommandOutput::default();
    out.summary.push(format!("{} rows", rows.len()));
    out.files.push(match run.format {
        OutputFormat::Csv => write_csv(&run.out.join("multichannel.csv"), &rows)?,
        OutputFormat::Json => write_json(&run.out.join("multichannel.json"), &rows)?,
    });
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub c: f64,
    pub regime: &'static str,
    pub kind: &'static str,
    pub sign: char,
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(rename = "E")]
    pub energy: f64,
    pub admissible: bool,
    pub failed: Option<String>,
    pub outside_allowed_interval: bool,
}

/// Both regimes, both κ families, `N = 0..=table_n_max`. Above the barrier
/// the two signs coincide, so only `+` is listed.
pub fn table_rows(run: &RunConfig) -> CliResult<Vec<TableRow>> {
    let mut rows = Vec::new();
    for &c in &run.c {
        for regime in [Regime::Above, Regime::Below] {
            let cfg = run.system(c)?.with_regime(regime);
            let signs: &[Sign] = match regime {
                Regime::Above => &[Sign::Plus],
                Regime::Below => &[Sign::Plus, Sign::Minus],
            };
            for kind in [SpecialKappa::HalfOdd, SpecialKappa::IntegerPi] {
                for &sign in signs {
                    for n in 0..=run.table_n_max {
                        let rec = special_energy_record(kind, sign, n, &cfg);
                        rows.push(TableRow {
                            c,
                            regime: regime.as_str(),
                            kind: kind.as_str(),
                            sign: sign.symbol(),
                            n,
                            energy: rec.energy,
                            admissible: rec.admissibility.admissible,
                            failed: rec.admissibility.failed,
                            outside_allowed_interval: rec.outside_allowed_interval,
                        });
                    }
                }
            }
        }
    }
    Ok(rows)
}

pub fn cmd_table1(run: &RunConfig) -> CliResult<CommandOutput> {
    let rows = table_rows(run)?;
    ensure_dir(&run.out)?;
    let mut out = CommandOutput::default();
    let admissible = rows.iter().filter(|r| r.admissible).count();
    out.summary
        .push(format!("{} rows, {admissible} admissible", rows.len()));
    out.files.push(match run.format {
        OutputFormat::Csv => write_csv(&run.out.join("table1.csv"), &rows)?,
        OutputFormat::Json => write_json(&run.out.join("table1.json"), &rows)?,
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::KappaGrid;

    #[test]
    fn default_window_starts_at_regime_edge() {
        let run = RunConfig::preset("fig2").unwrap();
        let cfg = run.system(1.0).unwrap();
        let w = requested_window(&run, &cfg).unwrap().unwrap();
        let clipped = clip_to_regime(&cfg, &w, &run.settings).unwrap();
        assert!(clipped.lo > cfg.v);
        assert!(clipped.lo < cfg.v + std::f64::consts::PI / 25.0);

        let run = RunConfig::preset("fig5").unwrap();
        let cfg = run.system(1.0).unwrap();
        let w = requested_window(&run, &cfg).unwrap().unwrap();
        assert_eq!(w.lo, cfg.branch_point());
    }

    #[test]
    fn spectrum_rows_are_ordered_and_verified() {
        let mut run = RunConfig::preset("fig2").unwrap();
        run.c = vec![0.4];
        run.kappa_grid = KappaGrid {
            start: 0.0,
            stop: 3.0,
            step: 0.25,
        };
        let r = &spectrum_runs(&run).unwrap()[0];
        let rows: Vec<SpectrumRow> = r.scan.samples().map(SpectrumRow::from).collect();
        assert!(!rows.is_empty());
        for w in rows.windows(2) {
            let ordered =
                w[0].kappa < w[1].kappa || (w[0].kappa == w[1].kappa && w[0].energy <= w[1].energy);
            assert!(ordered);
        }
    }

    #[test]
    fn window_outside_regime_gives_one_gap() {
        let run = RunConfig {
            regime: Regime::Below,
            e_window: Some(EnergyWindow::new(20.0, 30.0)),
            kappa_grid: KappaGrid {
                start: 0.0,
                stop: 1.0,
                step: 0.5,
            },
            ..RunConfig::default()
        };
        let r = &spectrum_runs(&run).unwrap()[0];
        assert_eq!(r.scan.sample_count(), 0);
        assert_eq!(r.report.gaps.len(), 1);
        assert_eq!((r.report.gaps[0].lo, r.report.gaps[0].hi), (0.0, 1.0));
    }

    #[test]
    fn multichannel_defaults_cover_examples() {
        let rows = multichannel_rows(&RunConfig::default()).unwrap();
        let bounded = rows
            .iter()
            .find(|r| r.channels == 10 && r.n == Some(1_000_000))
            .unwrap();
        assert!((bounded.k_beta - 0.01).abs() < 1e-12);
        assert!(bounded.abs_r2 < 1e-4);
        assert_eq!(bounded.class, "transmission-dominated");
        let unbounded = rows
            .iter()
            .find(|r| r.channels == 10 && r.n.is_none())
            .unwrap();
        assert!(unbounded.abs_r2_limit > 0.999);
        assert!(rows
            .iter()
            .filter(|r| r.channels == 1)
            .all(|r| r.abs_r2 == 0.0));
    }

    #[test]
    fn table_rows_for_unit_system() {
        let run = RunConfig::preset("table1").unwrap();
        let rows = table_rows(&run).unwrap();
        let above: Vec<_> = rows.iter().filter(|r| r.regime == "above").collect();
        assert_eq!(above.len(), 2 * 4);
        assert!(above.iter().all(|r| r.sign == '+'));
        let below = rows.iter().filter(|r| r.regime == "below").count();
        assert_eq!(below, 2 * 2 * 4);
    }
}
