use std::io::Write;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use primemean::constants;
use primemean::series::{fit_coefficients, FitResult};
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::args::{parse_count, parse_points, GridArgs, ModelArgs, OutputArgs, PrecisionArgs, StreamArgs};
use crate::error::{CliError, CliResult};
use crate::output::{emit_json, Cell, Format, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[allow(clippy::enum_variant_names)]
pub enum Target {
    /// `S1(n)/n − log log n`, coefficients a_j; known constant M.
    S1Residual,
    /// `S2(n)/n − log n`, coefficients c_j; known constant γ + E − 1.
    S2Residual,
    /// `Σ ⌊n/p⌋ log f(p) / n − d log n − log α · log log n`, coefficients
    /// η_j; known constant η₀.
    Theorem2Residual,
}

impl Target {
    fn name(self) -> &'static str {
        match self {
            Target::S1Residual => "s1-residual",
            Target::S2Residual => "s2-residual",
            Target::Theorem2Residual => "theorem2-residual",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConstantMode {
    /// Fit the constant term alongside the coefficients.
    Fit,
    /// Subtract the computed constant and fit only the coefficients.
    Known,
}

/// Least-squares fit of `Σ_{j=1}^{order} c_j / log^j n` (plus a constant in
/// `fit` mode) to a residual series.
#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long, value_enum, required_unless_present = "samples")]
    pub target: Option<Target>,
    /// CSV file with columns `n,value` to fit instead of a target.
    #[arg(long, value_name = "PATH", conflicts_with = "target")]
    pub samples: Option<PathBuf>,
    /// Number of 1/log^j n terms.
    #[arg(long, value_parser = parse_points, default_value_t = 1)]
    pub order: usize,
    /// Default: `known` for s1-residual and sample files, `fit` otherwise.
    #[arg(long, value_enum)]
    pub constant: Option<ConstantMode>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub precision: PrecisionArgs,
    /// Target precision of η₀ for `theorem2-residual --constant known`.
    #[arg(long, value_parser = crate::args::parse_precision, default_value_t = 1e-6)]
    pub eta0_precision: f64,
    #[command(flatten)]
    pub stream: StreamArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Deserialize)]
struct SampleRow {
    n: String,
    value: f64,
}

fn read_samples(path: &Path) -> CliResult<Samples> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let mut out = Vec::new();
    for row in reader.deserialize() {
        let row: SampleRow = row?;
        let n = parse_count(&row.n).map_err(CliError::Usage)?;
        out.push((n, row.value));
    }
    out.sort_by_key(|s| s.0);
    Ok(out)
}

type Samples = Vec<(u64, f64)>;

/// Residual samples for `target`, minus the known constant when asked.
fn target_samples(args: &Args, target: Target, mode: ConstantMode) -> CliResult<(Samples, Option<f64>, String)> {
    let model = args.model.load()?;
    let cfg = args.stream.sieve.config()?;
    let prec = args.precision.precisions();
    let points = args.grid.points((10_000, 100_000_000, 12))?;
    let known = match (mode, target) {
        (ConstantMode::Fit, _) => None,
        (ConstantMode::Known, Target::S1Residual) => {
            Some(constants::meissel_mertens(prec.meissel_mertens, &cfg)?.value)
        }
        (ConstantMode::Known, Target::S2Residual) => {
            let g = constants::euler_gamma(prec.gamma)?.value;
            Some(g + constants::mertens_e(prec.mertens_e, &cfg)?.value - 1.0)
        }
        (ConstantMode::Known, Target::Theorem2Residual) => {
            Some(constants::eta0(&model, args.eta0_precision, &cfg)?.value)
        }
    };
    if points[0] < 2 {
        return Err(primemean::Error::InvalidGrid("checkpoints start at 2".into()).into());
    }
    let report = args.stream.report(&model, points, false)?;
    let shift = known.unwrap_or(0.0);
    let samples = report
        .rows
        .iter()
        .map(|r| {
            let nf = r.n as f64;
            let l = nf.ln();
            let y = match target {
                Target::S1Residual => r.s1 as f64 / nf - l.ln(),
                Target::S2Residual => r.s2.get() / nf - l,
                Target::Theorem2Residual => r.prime_part.get() / nf - model.d * l - model.alpha.ln() * l.ln(),
            };
            (r.n, y - shift)
        })
        .collect();
    Ok((samples, known, model.name))
}

pub fn run(args: &Args, out: &mut dyn Write) -> CliResult<()> {
    let (samples, known, model, target, mode) = match (&args.samples, args.target) {
        (Some(path), _) => {
            let mode = args.constant.unwrap_or(ConstantMode::Known);
            (read_samples(path)?, None, None, "samples".to_string(), mode)
        }
        (None, Some(t)) => {
            let mode = args.constant.unwrap_or(match t {
                Target::S1Residual => ConstantMode::Known,
                _ => ConstantMode::Fit,
            });
            let (s, known, model) = target_samples(args, t, mode)?;
            (s, known, Some(model), t.name().to_string(), mode)
        }
        (None, None) => return Err(CliError::Usage("either --target or --samples is required".into())),
    };
    let fit = fit_coefficients(&samples, args.order, mode == ConstantMode::Fit)?;
    // Report the full constant term in `known` mode too.
    let constant = fit.constant.or(known);

    match args.output.format.unwrap_or(Format::Json) {
        Format::Json => {
            let mut body = Map::new();
            body.insert("target".into(), target.into());
            body.insert("model".into(), model.map_or(Value::Null, Value::from));
            body.insert(
                "constant_mode".into(),
                match mode {
                    ConstantMode::Fit => "fit",
                    ConstantMode::Known => "known",
                }
                .into(),
            );
            let FitResult {
                coefficients,
                residual_norm,
                condition_estimate,
                window,
                ..
            } = fit;
            body.insert("constant".into(), constant.into());
            body.insert("coefficients".into(), serde_json::to_value(coefficients)?);
            body.insert("residual_norm".into(), residual_norm.into());
            body.insert("condition_estimate".into(), condition_estimate.into());
            body.insert("window".into(), serde_json::to_value(window)?);
            emit_json("fit", body, out)
        }
        format => {
            let mut cols: Vec<String> = vec!["target".into(), "constant".into()];
            cols.extend((1..=fit.coefficients.len()).map(|j| format!("c_{j}")));
            cols.extend(["residual_norm", "condition_estimate", "n_min", "n_max", "points"].map(String::from));
            let mut row = vec![Cell::Text(target), Cell::opt(constant)];
            row.extend(fit.coefficients.iter().map(|&c| Cell::Float(c)));
            row.extend([
                Cell::Float(fit.residual_norm),
                Cell::Float(fit.condition_estimate),
                Cell::Int(fit.window.n_min),
                Cell::Int(fit.window.n_max),
                Cell::Int(fit.window.points as u64),
            ]);
            let mut t = Table::new(&cols);
            t.push(row);
            t.write(format, "fit", Map::new(), out)
        }
    }
}
