mod args;
mod commands;
mod lti_file;
mod report;

use std::process::ExitCode;

use anyhow::{Context, Result};
use args::{Cli, Command};
use clap::Parser;

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| report::UsageError(format!("THREADS='{raw}' is not a thread count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("cannot configure the thread pool")
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match &cli.command {
        Command::Models => commands::models(),
        Command::Measure(a) => commands::measure(a),
        Command::Certify(a) => commands::certify_cmd(a),
        Command::Orbit(a) => commands::orbit(a),
        Command::Bound(a) => commands::bound(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Figure(a) => commands::figure(a),
    }
}

fn main() -> ExitCode {
    let argv = args::expand_param_flags(std::env::args_os().collect());
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if report::is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(report::exit_code(&e) as u8)
        }
    }
}
