//! Argument groups shared by several subcommands.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use primemean::constants::Precisions;
use primemean::multfunc::{builtin, load_model, PrimeModel};
use primemean::primesums::cache::ReportCache;
use primemean::primesums::{sums_stream, StreamOptions, SumsReport};
use primemean::sieve::{SieveConfig, DEFAULT_MAX_BOUND, DEFAULT_SEGMENT_SIZE};
use primemean::CheckpointGrid;

use crate::error::{CliError, CliResult};
use crate::output::Format;

/// Nonnegative integer, also written as `1e6` or `2.5e7`.
pub fn parse_count(s: &str) -> Result<u64, String> {
    let s = s.trim().replace('_', "");
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let f: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !(f >= 0.0) || f.fract() != 0.0 || f > 2f64.powi(53) {
        return Err(format!("`{s}` is not a nonnegative integer below 2^53"));
    }
    Ok(f as u64)
}

pub fn parse_points(s: &str) -> Result<usize, String> {
    parse_count(s).map(|v| v as usize)
}

pub fn parse_precision(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("precision must be positive and finite, got `{s}`"))
    }
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Built-in model: kappa, two_omega, euler_phi, sigma, divisor_d, jordan_<k>.
    #[arg(long, default_value = "kappa")]
    pub model: String,
    /// Custom model description file (see docs/model-format.md).
    #[arg(long, value_name = "PATH", conflicts_with = "model")]
    pub model_file: Option<PathBuf>,
}

impl ModelArgs {
    pub fn load(&self) -> CliResult<PrimeModel> {
        Ok(match &self.model_file {
            Some(path) => load_model(path)?,
            None => builtin(&self.model)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Spacing {
    Log,
    Linear,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// A single checkpoint.
    #[arg(long, value_parser = parse_count, conflicts_with_all = ["from", "to", "points"])]
    pub n: Option<u64>,
    /// Smallest checkpoint.
    #[arg(long, value_parser = parse_count)]
    pub from: Option<u64>,
    /// Largest checkpoint.
    #[arg(long, value_parser = parse_count)]
    pub to: Option<u64>,
    /// Number of checkpoints (at most 64).
    #[arg(long, value_parser = parse_points)]
    pub points: Option<usize>,
    #[arg(long, value_enum, default_value_t = Spacing::Log)]
    pub spacing: Spacing,
}

impl GridArgs {
    /// Checkpoints, with `(from, to, points)` filling whatever was not given.
    /// `1` is allowed here; callers that stream must drop it.
    pub fn points(&self, default: (u64, u64, usize)) -> CliResult<Vec<u64>> {
        if let Some(n) = self.n {
            return Ok(vec![n]);
        }
        let from = self.from.unwrap_or(default.0);
        let to = self.to.unwrap_or(default.1);
        let count = self.points.unwrap_or(default.2);
        if from == 1 {
            // The grid type starts at 2; keep n = 1 as an extra leading point.
            if count < 2 || to < 2 {
                return Ok(vec![1]);
            }
            let mut rest = self.spaced(2, to, count - 1)?;
            rest.insert(0, 1);
            return Ok(rest);
        }
        self.spaced(from, to, count)
    }

    fn spaced(&self, from: u64, to: u64, count: usize) -> CliResult<Vec<u64>> {
        let grid = match self.spacing {
            Spacing::Log => CheckpointGrid::log_spaced(from, to, count)?,
            Spacing::Linear => CheckpointGrid::linear(from, to, count)?,
        };
        Ok(grid.points().to_vec())
    }
}

#[derive(Debug, Clone, Args)]
pub struct SieveArgs {
    /// Largest number any sieve may reach.
    #[arg(long, value_parser = parse_count, default_value_t = DEFAULT_MAX_BOUND)]
    pub max_sieve: u64,
    /// Numbers per sieve segment.
    #[arg(long, value_parser = parse_count, default_value_t = DEFAULT_SEGMENT_SIZE)]
    pub segment_size: u64,
}

impl SieveArgs {
    pub fn config(&self) -> CliResult<SieveConfig> {
        if self.segment_size < 2 {
            return Err(CliError::Usage("--segment-size must be at least 2".into()));
        }
        Ok(SieveConfig {
            max_bound: self.max_sieve,
            segment_size: self.segment_size,
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct StreamArgs {
    #[command(flatten)]
    pub sieve: SieveArgs,
    /// Sieve segments on all cores. Output is identical either way.
    #[arg(long)]
    pub parallel: bool,
    /// Checkpoint cache directory; overrides $PRIMEMEAN_CACHE.
    #[arg(long, value_name = "DIR")]
    pub cache_dir: Option<PathBuf>,
}

impl StreamArgs {
    pub fn options(&self, with_u: bool) -> CliResult<StreamOptions> {
        Ok(StreamOptions {
            sieve: self.sieve.config()?,
            parallel: self.parallel,
            with_u,
        })
    }

    pub fn cache(&self) -> Option<ReportCache> {
        match &self.cache_dir {
            Some(dir) => Some(ReportCache::new(dir)),
            None => ReportCache::from_env(),
        }
    }

    /// Prime sums on `points` (all at least 2), through the cache if one is set.
    pub fn report(&self, model: &PrimeModel, points: Vec<u64>, with_u: bool) -> CliResult<SumsReport> {
        let opts = self.options(with_u)?;
        let grid = CheckpointGrid::new(points)?;
        grid.check_bound(&opts.sieve)?;
        Ok(match self.cache() {
            Some(cache) => cache.load_or_compute(model, &grid, &opts)?,
            None => sums_stream(model, &grid, &opts)?,
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct PrecisionArgs {
    /// Target precision for Euler's constant.
    #[arg(long, value_parser = parse_precision, default_value_t = Precisions::default().gamma)]
    pub gamma_precision: f64,
    /// Target precision for the Meissel–Mertens constant M.
    #[arg(long, value_parser = parse_precision, default_value_t = Precisions::default().meissel_mertens)]
    pub m_precision: f64,
    /// Target precision for Mertens' constant E.
    #[arg(long, value_parser = parse_precision, default_value_t = Precisions::default().mertens_e)]
    pub e_precision: f64,
    /// Target precision for C_Q and ρ_f.
    #[arg(long, value_parser = parse_precision, default_value_t = Precisions::default().c_q)]
    pub cq_precision: f64,
    /// Target precision for the Saffari coefficients a_j.
    #[arg(long, value_parser = parse_precision, default_value_t = Precisions::default().saffari)]
    pub aj_precision: f64,
}

impl PrecisionArgs {
    pub fn precisions(&self) -> Precisions {
        Precisions {
            gamma: self.gamma_precision,
            meissel_mertens: self.m_precision,
            mertens_e: self.e_precision,
            c_q: self.cq_precision,
            saffari: self.aj_precision,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output format; the default depends on the command.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_accept_scientific_notation() {
        assert_eq!(parse_count("1e6"), Ok(1_000_000));
        assert_eq!(parse_count("2.5e3"), Ok(2500));
        assert_eq!(parse_count("319"), Ok(319));
        assert_eq!(parse_count("1_000"), Ok(1000));
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
        assert!(parse_count("1e30").is_err());
    }
}
