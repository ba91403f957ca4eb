use serde::Serialize;

use crate::error::{Error, Result};
use crate::sieve::SieveConfig;

pub const MAX_CHECKPOINTS: usize = 64;

/// Ascending list of `n` at which streaming sums are recorded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckpointGrid {
    points: Vec<u64>,
}

impl CheckpointGrid {
    pub fn new(points: Vec<u64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidGrid("grid is empty".into()));
        }
        if points.len() > MAX_CHECKPOINTS {
            return Err(Error::InvalidGrid(format!(
                "{} checkpoints, at most {MAX_CHECKPOINTS} allowed",
                points.len()
            )));
        }
        if points[0] < 2 {
            return Err(Error::InvalidGrid(format!("checkpoints start at 2, got {}", points[0])));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid("checkpoints must be strictly ascending".into()));
        }
        Ok(Self { points })
    }

    /// `count` points spaced evenly in `log n` from `from` to `to`
    /// (both included). Duplicates produced by rounding are dropped.
    pub fn log_spaced(from: u64, to: u64, count: usize) -> Result<Self> {
        Self::new(spaced(from, to, count, true)?)
    }

    pub fn linear(from: u64, to: u64, count: usize) -> Result<Self> {
        Self::new(spaced(from, to, count, false)?)
    }

    pub fn single(n: u64) -> Result<Self> {
        Self::new(vec![n])
    }

    pub fn points(&self) -> &[u64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn max(&self) -> u64 {
        *self.points.last().expect("grid is never empty")
    }

    pub fn check_bound(&self, config: &SieveConfig) -> Result<()> {
        if self.max() > config.max_bound {
            return Err(Error::InvalidGrid(format!(
                "checkpoint {} exceeds sieve bound {}",
                self.max(),
                config.max_bound
            )));
        }
        Ok(())
    }
}

fn spaced(from: u64, to: u64, count: usize, log: bool) -> Result<Vec<u64>> {
    if count == 0 {
        return Err(Error::InvalidGrid("need at least one point".into()));
    }
    if from > to {
        return Err(Error::InvalidGrid(format!("from {from} > to {to}")));
    }
    if count == 1 || from == to {
        return Ok(vec![to]);
    }
    let mut out: Vec<u64> = (0..count)
        .map(|i| {
            let t = i as f64 / (count - 1) as f64;
            if i == 0 {
                from
            } else if i == count - 1 {
                to
            } else if log {
                ((from as f64).ln() * (1.0 - t) + (to as f64).ln() * t).exp().round() as u64
            } else {
                (from as f64 + (to - from) as f64 * t).round() as u64
            }
        })
        .collect();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_grid_endpoints_and_order() {
        let g = CheckpointGrid::log_spaced(10_000, 100_000_000, 12).unwrap();
        assert_eq!(g.len(), 12);
        assert_eq!(g.points()[0], 10_000);
        assert_eq!(g.max(), 100_000_000);
        let g = CheckpointGrid::log_spaced(2, 5, 20).unwrap();
        assert_eq!(g.points(), &[2, 3, 4, 5]);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(CheckpointGrid::new(vec![]).is_err());
        assert!(CheckpointGrid::new(vec![1, 5]).is_err());
        assert!(CheckpointGrid::new(vec![5, 5]).is_err());
        assert!(CheckpointGrid::new((2..=66).collect()).is_err());
        assert!(CheckpointGrid::log_spaced(10, 5, 3).is_err());
        let g = CheckpointGrid::single(2_000_000_000).unwrap();
        assert!(g.check_bound(&SieveConfig::default()).is_err());
    }
}
