use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{
    parse_branches, parse_list, parse_window, ConfigOverrides, MultichannelOverrides, OutputFormat,
    RunConfig, SettingsOverrides,
};
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "mbspec",
    version,
    about = "Band spectra of dense periodic barrier arrays"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub args: RunArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Energy roots E(κ), one CSV per c.
    Spectrum,
    /// Band/gap intervals and jumps in κ.
    Bands,
    /// Finite-chain transfer matrices against the dense limit.
    Converge,
    /// Multi-channel reflection sweep.
    Multichannel,
    /// Closed-form energies at κ = (2N+1)π/2 and Nπ.
    Table1,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON file with any subset of the run configuration keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// fig1..fig7, converge, table1.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Barrier height.
    #[arg(long = "V", global = true)]
    pub v: Option<f64>,
    /// Total length.
    #[arg(long = "L", global = true)]
    pub l: Option<f64>,
    /// Spacing-to-width ratio.
    #[arg(long, global = true, conflicts_with = "c_sweep")]
    pub c: Option<f64>,
    /// Comma-separated list of c values, one run each.
    #[arg(long, global = true)]
    pub c_sweep: Option<String>,
    /// above | below
    #[arg(long, global = true)]
    pub regime: Option<String>,
    /// squared-phase | phase
    #[arg(long, global = true)]
    pub mode: Option<String>,
    /// start:stop:step; numbers may carry a `pi` suffix.
    #[arg(long, global = true)]
    pub kappa_grid: Option<String>,
    /// lo:hi
    #[arg(long, global = true)]
    pub e_window: Option<String>,
    /// n0:n1, tangent periods to scan.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub branches: Option<String>,
    #[arg(long, global = true)]
    pub max_roots: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// csv | json
    #[arg(long, global = true)]
    pub format: Option<String>,

    #[arg(long, global = true)]
    pub tol_residual: Option<f64>,
    #[arg(long, global = true)]
    pub tol_root: Option<f64>,
    #[arg(long, global = true)]
    pub tol_tangency: Option<f64>,
    #[arg(long, global = true)]
    pub tol_barrier_band: Option<f64>,
    #[arg(long, global = true)]
    pub jump_fraction: Option<f64>,
    #[arg(long, global = true)]
    pub max_grid_points: Option<usize>,

    /// Probe energy for `converge`.
    #[arg(long, global = true)]
    pub energy: Option<f64>,
    /// Comma-separated barrier counts for `converge`.
    #[arg(long, global = true)]
    pub n_list: Option<String>,

    /// Comma-separated channel counts N.
    #[arg(long, global = true)]
    pub channels: Option<String>,
    /// Comma-separated scatterer counts n (bounded rows).
    #[arg(long, global = true)]
    pub scatterers: Option<String>,
    /// Total length of the bounded arrays.
    #[arg(long, global = true)]
    pub length: Option<f64>,
    /// Comma-separated wavenumbers (bounded rows).
    #[arg(long, global = true)]
    pub k: Option<String>,
    /// Comma-separated β values (unbounded rows).
    #[arg(long, global = true)]
    pub beta: Option<String>,
    /// Comma-separated wavenumbers (unbounded rows).
    #[arg(long, global = true)]
    pub beta_k: Option<String>,

    /// Largest N in `table1`.
    #[arg(long, global = true)]
    pub n_max: Option<u32>,
}

impl RunArgs {
    pub fn overrides(&self) -> CliResult<ConfigOverrides> {
        let cfg_err = |e: mbspec::Error| CliError::Config(e.to_string());
        let settings = SettingsOverrides {
            residual_tol: self.tol_residual,
            root_tol: self.tol_root,
            tangency_tol: self.tol_tangency,
            barrier_band: self.tol_barrier_band,
            jump_fraction: self.jump_fraction,
            max_grid_points: self.max_grid_points,
            ..Default::default()
        };
        let multichannel = MultichannelOverrides {
            channels: self.channels.as_deref().map(parse_list).transpose()?,
            scatterers: self.scatterers.as_deref().map(parse_list).transpose()?,
            length: self.length,
            k: self.k.as_deref().map(parse_list).transpose()?,
            beta: self.beta.as_deref().map(parse_list).transpose()?,
            beta_k: self.beta_k.as_deref().map(parse_list).transpose()?,
        };
        let c = match (&self.c, &self.c_sweep) {
            (Some(c), _) => Some(vec![*c]),
            (None, Some(s)) => Some(parse_list(s)?),
            (None, None) => None,
        };
        Ok(ConfigOverrides {
            preset: self.preset.clone(),
            v: self.v,
            l: self.l,
            c,
            regime: self
                .regime
                .as_deref()
                .map(str::parse)
                .transpose()
                .map_err(cfg_err)?,
            mode: self
                .mode
                .as_deref()
                .map(str::parse)
                .transpose()
                .map_err(cfg_err)?,
            kappa_grid: self.kappa_grid.as_deref().map(str::parse).transpose()?,
            e_window: self.e_window.as_deref().map(parse_window).transpose()?,
            branches: self.branches.as_deref().map(parse_branches).transpose()?,
            default_branch_count: None,
            max_roots: self.max_roots,
            settings: (!settings.is_empty()).then_some(settings),
            energy: self.energy,
            n_list: self.n_list.as_deref().map(parse_list).transpose()?,
            multichannel: (!multichannel.is_empty()).then_some(multichannel),
            table_n_max: self.n_max,
            out: self.out.clone(),
            format: self
                .format
                .as_deref()
                .map(str::parse::<OutputFormat>)
                .transpose()?,
        })
    }

    /// Applies the layers: defaults, preset, `--config` file, flags.
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let file = self
            .config
            .as_deref()
            .map(RunConfig::load_file)
            .transpose()?;
        RunConfig::resolve(file.as_ref(), &self.overrides()?)
    }
}
