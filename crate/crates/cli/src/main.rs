#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod cmd;
mod error;
mod output;

use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliResult;

/// Geometric means of multiplicative functions through prime sums.
///
/// Exit codes: 0 success, 1 other failure (including failed checks),
/// 2 bad grid, 3 unreachable precision, 4 unknown check, 5 ill-conditioned fit.
#[derive(Debug, Parser)]
#[command(name = "primemean", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print constants with their tail bounds.
    Constants(cmd::constants::Args),
    /// Evaluate geometric means on a checkpoint grid.
    Geomean(cmd::geomean::Args),
    /// Dump the streaming prime sums.
    Sums(cmd::sums::Args),
    /// Run named verification checks.
    Verify(cmd::verify::Args),
    /// Fit expansion coefficients to a residual series.
    Fit(cmd::fit::Args),
}

fn run(cli: &Cli, out: &mut dyn Write) -> CliResult<bool> {
    match &cli.command {
        Command::Constants(a) => cmd::constants::run(a, out).map(|_| true),
        Command::Geomean(a) => cmd::geomean::run(a, out).map(|_| true),
        Command::Sums(a) => cmd::sums::run(a, out).map(|_| true),
        Command::Verify(a) => cmd::verify::run(a, out),
        Command::Fit(a) => cmd::fit::run(a, out).map(|_| true),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors get 1 so that 2 keeps meaning a bad grid.
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = run(&cli, &mut out);
    let _ = out.flush();
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("primemean: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
