//! `osf`: dataset generation, training, rendering and evaluation.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
//! Progress goes to standard error; results only to files.

mod args;
mod commands;
mod config;
mod error;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, FromArgMatches};

use args::{Cli, Command};
use error::{CliError, Result};

#[global_allocator]
static GLOBAL: mimalloc::MiMalloc = mimalloc::MiMalloc;

fn parse(argv: &[OsString]) -> std::result::Result<Cli, clap::Error> {
    let matches = Cli::command().try_get_matches_from(argv)?;
    Cli::from_arg_matches(&matches)
}

fn clap_exit(e: clap::Error) -> ExitCode {
    let _ = e.print();
    match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
        _ => ExitCode::from(1),
    }
}

/// Parses the command line, then fills unset flags from `--config`.
fn cli_from_env() -> std::result::Result<Cli, ExitCode> {
    let argv: Vec<OsString> = std::env::args_os().collect();
    let matches = Cli::command().try_get_matches_from(&argv).map_err(clap_exit)?;
    let cli = Cli::from_arg_matches(&matches).map_err(clap_exit)?;
    let Some(path) = &cli.config else { return Ok(cli) };
    let extra = config::config_args(path, &matches).map_err(|e| report(&e))?;
    let mut full = argv;
    full.extend(extra);
    parse(&full).map_err(clap_exit)
}

fn report(e: &CliError) -> ExitCode {
    eprintln!("osf: {e}");
    e.exit_code()
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot set thread count: {e}")))?;
    }
    let ctx = commands::Context { seed: cli.seed, verbose: cli.verbose };
    match &cli.command {
        Command::MakeDataset(a) => commands::make_dataset(&ctx, a),
        Command::Train(a) => commands::train(&ctx, a),
        Command::Render(a) => commands::render(&ctx, a),
        Command::Eval(a) => commands::eval(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = match cli_from_env() {
        Ok(c) => c,
        Err(code) => return code,
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}
