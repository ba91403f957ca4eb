use std::io::Write;
use std::path::PathBuf;

use primemean::constants::{self, ConstantValue};
use primemean::multfunc::{builtin, load_model};
use serde_json::{Map, Value};

use crate::args::{parse_points, parse_precision, OutputArgs, PrecisionArgs, SieveArgs};
use crate::error::CliResult;
use crate::output::{emit_json, Cell, Format, Table};

/// Euler's constant, M and E; with a model also C_Q, ρ_f, η₀ and the
/// leading constant; with `--aj r` the Saffari coefficients a_1..a_r.
#[derive(Debug, clap::Args)]
pub struct Args {
    /// Built-in model whose constants to add.
    #[arg(long)]
    pub model: Option<String>,
    /// Custom model description file.
    #[arg(long, value_name = "PATH", conflicts_with = "model")]
    pub model_file: Option<PathBuf>,
    /// Emit a_1..a_r.
    #[arg(long, value_name = "R", value_parser = parse_points, default_value_t = 0)]
    pub aj: usize,
    /// Target precision for η₀ and the constants built from it.
    #[arg(long, value_parser = parse_precision, default_value_t = 1e-6)]
    pub eta0_precision: f64,
    #[command(flatten)]
    pub precision: PrecisionArgs,
    #[command(flatten)]
    pub sieve: SieveArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn named(mut c: ConstantValue, name: &str) -> ConstantValue {
    c.name = name.into();
    c
}

pub fn run(args: &Args, out: &mut dyn Write) -> CliResult<()> {
    let cfg = args.sieve.config()?;
    let prec = args.precision.precisions();
    let model = match (&args.model, &args.model_file) {
        (_, Some(path)) => Some(load_model(path)?),
        (Some(name), None) => Some(builtin(name)?),
        (None, None) => None,
    };

    let mut rows = vec![
        named(constants::euler_gamma(prec.gamma)?, "gamma"),
        named(
            constants::meissel_mertens(prec.meissel_mertens, &cfg)?,
            "meissel_mertens",
        ),
        named(constants::mertens_e(prec.mertens_e, &cfg)?, "mertens_e"),
    ];
    if let Some(m) = &model {
        rows.push(named(constants::c_q(m, prec.c_q, &cfg)?, "c_q"));
        rows.push(named(constants::rho_f(m, prec.c_q, &cfg)?, "rho_f"));
        rows.push(named(constants::eta0(m, args.eta0_precision, &cfg)?, "eta0"));
        rows.push(named(
            constants::leading_constant(m, args.eta0_precision, &cfg)?,
            "leading_constant",
        ));
        rows.push(named(
            constants::prime_power_correction(m, args.eta0_precision.max(constants::MERTENS_E_MIN_PRECISION), &cfg)?,
            "prime_power_correction",
        ));
        rows.push(named(
            constants::geomean_log_constant(m, args.eta0_precision, &cfg)?,
            "geomean_log_constant",
        ));
    }
    for j in 1..=args.aj {
        let j = u32::try_from(j).unwrap_or(u32::MAX);
        rows.push(constants::saffari_a(j, prec.saffari)?);
    }

    match args.output.format.unwrap_or(Format::Json) {
        Format::Json => {
            let mut body = Map::new();
            body.insert(
                "model".into(),
                model.as_ref().map_or(Value::Null, |m| m.name.clone().into()),
            );
            body.insert("constants".into(), serde_json::to_value(&rows)?);
            emit_json("constants", body, out)
        }
        format => {
            let mut t = Table::new(&["name", "value", "tail_bound", "method", "params"]);
            for c in &rows {
                let params = Cell::Map(c.params.iter().map(|(k, v)| (k.clone(), *v)).collect());
                t.push(vec![
                    Cell::Text(c.name.clone()),
                    Cell::Float(c.value),
                    Cell::Float(c.tail_bound),
                    Cell::Text(c.method.clone()),
                    params,
                ]);
            }
            t.write(format, "constants", Map::new(), out)
        }
    }
}
