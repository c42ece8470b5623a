use std::process::ExitCode;

use clap::Parser;
use mbspec_cli::{configure_threads, execute, Cli, CliResult};

fn run(cli: &Cli) -> CliResult<()> {
    configure_threads()?;
    let cfg = cli.args.resolve()?;
    let out = execute(cli.command, &cfg)?;
    for line in &out.summary {
        println!("{line}");
    }
    for file in &out.files {
        eprintln!("wrote {}", file.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mbspec: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
