use std::io::Write;

use serde_json::Map;

use crate::args::{GridArgs, ModelArgs, OutputArgs, StreamArgs};
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Format, Table};

pub const COLUMNS: [&str; 12] = [
    "n",
    "s1",
    "s2",
    "s3",
    "f1",
    "f2",
    "r_sum",
    "m_of_x",
    "u_of_x",
    "prime_part",
    "n_log_g",
    "err_bound",
];

/// Raw streaming prime sums at each checkpoint.
#[derive(Debug, clap::Args)]
pub struct Args {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Also compute U(x) = Σ 1/λ(k), which factors every k up to the last checkpoint.
    #[arg(long)]
    pub with_u: bool,
    #[command(flatten)]
    pub stream: StreamArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn run(args: &Args, out: &mut dyn Write) -> CliResult<()> {
    let model = args.model.load()?;
    let points = args.grid.points((10_000, 100_000_000, 12))?;
    if points[0] < 2 {
        return Err(CliError::Core(primemean::Error::InvalidGrid(
            "checkpoints start at 2".into(),
        )));
    }
    let report = args.stream.report(&model, points, args.with_u)?;
    let mut t = Table::new(&COLUMNS);
    for r in &report.rows {
        t.push(vec![
            Cell::Int(r.n),
            Cell::Int(r.s1),
            Cell::Float(r.s2.get()),
            Cell::Float(r.s3.get()),
            Cell::Float(r.f1.get()),
            Cell::Float(r.f2.get()),
            Cell::Float(r.r_sum.get()),
            Cell::Float(r.m_of_x.get()),
            Cell::opt(r.u_of_x.map(|u| u.get())),
            Cell::Float(r.prime_part.get()),
            Cell::Float(r.n_log_g.get()),
            Cell::Float(r.err_bound),
        ]);
    }
    let mut meta = Map::new();
    meta.insert("model".into(), report.model.clone().into());
    meta.insert("fingerprint".into(), report.fingerprint.clone().into());
    t.write(args.output.format.unwrap_or(Format::Csv), "sums", meta, out)
}
