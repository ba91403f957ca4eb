use std::io::Write;

use primemean::constants;
use primemean::primesums::log_geomean_bruteforce_prefix;
use primemean::sieve::{spf_build, DEFAULT_SPF_CAP};
use serde_json::Map;

use crate::args::{parse_precision, GridArgs, ModelArgs, OutputArgs, StreamArgs};
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Format, Table};

/// `log G_f(n)` by the prime-power identity, normalized by the leading
/// growth `n^d (log n)^(log α)` and compared with the predicted constant.
#[derive(Debug, clap::Args)]
pub struct Args {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Add `Σ log f(k)` by factorization (for n up to the SPF table cap)
    /// and fail unless it agrees with the identity.
    #[arg(long)]
    pub oracle: bool,
    /// Target precision of the predicted constant.
    #[arg(long, value_parser = parse_precision, default_value_t = 1e-6)]
    pub precision: f64,
    #[command(flatten)]
    pub stream: StreamArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn run(args: &Args, out: &mut dyn Write) -> CliResult<()> {
    let model = args.model.load()?;
    let points = args.grid.points((10_000, 100_000_000, 12))?;
    let streamed: Vec<u64> = points.iter().copied().filter(|&n| n >= 2).collect();
    let report = if streamed.is_empty() {
        None
    } else {
        Some(args.stream.report(&model, streamed, false)?)
    };
    let n_log_g = |n: u64| -> f64 {
        report
            .as_ref()
            .and_then(|r| r.row(n))
            .map_or(0.0, |row| row.n_log_g.get())
    };

    let cfg = args.stream.sieve.config()?;
    let predicted = constants::geomean_log_constant(&model, args.precision, &cfg)?;
    let log_alpha = model.alpha.ln();

    let oracle_max = points.iter().copied().filter(|&n| n <= DEFAULT_SPF_CAP).max();
    let prefix = match (args.oracle, oracle_max) {
        (true, Some(m)) => Some(log_geomean_bruteforce_prefix(&model, m, &spf_build(m.max(2))?)?),
        _ => None,
    };

    let mut cols = vec!["n", "log_g", "g", "g_normalized", "predicted", "abs_diff"];
    if args.oracle {
        cols.push("log_g_oracle");
    }
    let mut t = Table::new(&cols);
    let mut disagreements = Vec::new();
    for &n in &points {
        let nf = n as f64;
        let total = n_log_g(n);
        let log_g = total / nf;
        let l = nf.ln();
        // log log n only matters when α ≠ 1, and is undefined at n = 1.
        let growth = match (log_alpha == 0.0, n >= 2) {
            (true, _) => Some(model.d * l),
            (false, true) => Some(model.d * l + log_alpha * l.ln()),
            (false, false) => None,
        };
        let normalized = growth.map(|g| (log_g - g).exp());
        let expected = predicted.value.exp();
        let mut row = vec![
            Cell::Int(n),
            Cell::Float(log_g),
            Cell::Float(log_g.exp()),
            Cell::opt(normalized),
            Cell::Float(expected),
            Cell::opt(normalized.map(|g| (g - expected).abs())),
        ];
        if args.oracle {
            let oracle = prefix.as_ref().filter(|_| n <= DEFAULT_SPF_CAP).map(|p| p[n as usize]);
            if let Some(o) = oracle {
                if (o - total).abs() > 1e-9 * nf.max(1.0) {
                    disagreements.push(format!("n={n}: identity {total}, factorization {o}"));
                }
            }
            row.push(Cell::opt(oracle.map(|o| o / nf)));
        }
        t.push(row);
    }

    let mut meta = Map::new();
    meta.insert("model".into(), model.name.clone().into());
    meta.insert("d".into(), model.d.into());
    meta.insert("alpha".into(), model.alpha.into());
    meta.insert("predicted_log_constant".into(), serde_json::to_value(&predicted)?);
    t.write(args.output.format.unwrap_or(Format::Csv), "geomean", meta, out)?;
    if !disagreements.is_empty() {
        return Err(CliError::Oracle(disagreements.join("; ")));
    }
    Ok(())
}
