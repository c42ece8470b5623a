//! Command-line front end for `mbspec`: spectra, band/gap reports,
//! chain convergence tables, multi-channel sweeps and closed-form tables.

pub mod args;
pub mod commands;
pub mod config;
mod error;
pub mod output;

pub use args::{Cli, Command, RunArgs};
pub use commands::CommandOutput;
pub use config::RunConfig;
pub use error::{CliError, CliResult};

pub fn execute(command: Command, run: &RunConfig) -> CliResult<CommandOutput> {
    match command {
        Command::Spectrum => commands::cmd_spectrum(run),
        Command::Bands => commands::cmd_bands(run),
        Command::Converge => commands::cmd_converge(run),
        Command::Multichannel => commands::cmd_multichannel(run),
        Command::Table1 => commands::cmd_table1(run),
    }
}

/// Reads `MBSPEC_THREADS` and sizes the global pool accordingly.
pub fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("MBSPEC_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Config(format!(
            "MBSPEC_THREADS must be a positive integer, got '{raw}'"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot size thread pool: {e}")))
}
