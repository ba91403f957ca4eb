use std::io::Write;

use primemean::verify::{CheckParams, Verifier, CHECK_NAMES};
use serde_json::Map;

use crate::args::{parse_count, parse_points, OutputArgs, PrecisionArgs, StreamArgs};
use crate::error::CliResult;
use crate::output::{Cell, Format, Table};

/// Run named checks; exits 0 only if every selected check passes.
#[derive(Debug, clap::Args)]
pub struct Args {
    /// Check to run (repeatable or comma-separated). Default: all.
    #[arg(long = "check", value_name = "NAME", value_delimiter = ',')]
    pub checks: Vec<String>,
    /// Print the check names and exit.
    #[arg(long)]
    pub list: bool,
    /// Lower end of the check's grid, when it has one.
    #[arg(long, value_parser = parse_count)]
    pub from: Option<u64>,
    /// Upper end of the check's grid.
    #[arg(long, value_parser = parse_count)]
    pub to: Option<u64>,
    /// Grid size, for checks that sweep.
    #[arg(long, value_parser = parse_points)]
    pub points: Option<usize>,
    #[command(flatten)]
    pub precision: PrecisionArgs,
    #[command(flatten)]
    pub stream: StreamArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Returns whether all checks passed.
pub fn run(args: &Args, out: &mut dyn Write) -> CliResult<bool> {
    if args.list {
        for name in CHECK_NAMES {
            writeln!(out, "{name}")?;
        }
        return Ok(true);
    }
    let names: Vec<&str> = if args.checks.is_empty() {
        CHECK_NAMES.to_vec()
    } else {
        args.checks.iter().map(|s| s.trim()).collect()
    };
    if let Some(bad) = names.iter().find(|n| !CHECK_NAMES.contains(n)) {
        return Err(primemean::Error::UnknownCheck(bad.to_string()).into());
    }

    let verifier = Verifier::new(
        args.stream.sieve.config()?,
        args.stream.parallel,
        args.precision.precisions(),
        args.stream.cache(),
    );
    let params = CheckParams {
        from: args.from,
        to: args.to,
        points: args.points,
    };
    let mut t = Table::new(&["check", "pass", "detail", "metrics"]);
    let mut all = true;
    for name in names {
        let o = verifier.run(name, params)?;
        all &= o.pass;
        t.push(vec![
            Cell::Text(o.name),
            Cell::Bool(o.pass),
            Cell::Text(o.detail),
            Cell::Map(o.metrics.into_iter().collect()),
        ]);
    }
    let mut meta = Map::new();
    meta.insert("all_passed".into(), all.into());
    t.write(args.output.format.unwrap_or(Format::Table), "verify", meta, out)?;
    Ok(all)
}
