//! Summatory quantities over primes, evaluated exactly (up to compensated
//! rounding) at finitely many `n`.
//!
//! For a checkpoint `n` and prime `p ≤ n` with `q = ⌊n/p⌋`, `{n/p} = (n mod p)/p`:
//!
//! | field        | sum                                   |
//! |--------------|---------------------------------------|
//! | `s1`         | `Σ q` (exact integer)                 |
//! | `s2`         | `Σ q log p`                           |
//! | `s3`         | `Σ q log(f(p) / (α p^d))`             |
//! | `f1`         | `Σ {n/p}`                             |
//! | `f2`         | `Σ_{p^a ≤ n} {n/p^a}`                 |
//! | `r_sum`      | `Σ {n/p} log p`                       |
//! | `m_of_x`     | `Σ log p / p`                         |
//! | `u_of_x`     | `Σ_{2≤k≤n} log κ(k) / log k`          |
//! | `prime_part` | `Σ q log f(p)`                        |
//! | `n_log_g`    | `prime_part + Σ_{a≥2} ⌊n/p^a⌋ log(f(p^a)/f(p^(a−1)))` |
//!
//! `n_log_g` is `Σ_{k≤n} log f(k)`, i.e. `n·log G_f(n)`.

pub mod cache;
mod grid;

pub use grid::{CheckpointGrid, MAX_CHECKPOINTS};

use rayon::prelude::*;
use serde::Serialize;

use crate::accum::{Compensated, NeumaierSum, Summed};
use crate::error::{Error, Result};
use crate::multfunc::{value_at, PrimeModel};
use crate::sieve::{base_primes, primes_up_to, segment_ranges, sieve_segment, SieveConfig, SpfTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamOptions {
    pub sieve: SieveConfig,
    /// Sieve blocks on the rayon pool. Results are bit-identical either way.
    pub parallel: bool,
    /// Also run the `U(x)` pass over all `k ≤ max(grid)`.
    pub with_u: bool,
}

impl Default for StreamOptions {
    fn default() -> Self {
        Self {
            sieve: SieveConfig::default(),
            parallel: false,
            with_u: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckpointSums {
    pub n: u64,
    pub s1: u64,
    pub s2: Compensated,
    pub s3: Compensated,
    pub f1: Compensated,
    pub f2: Compensated,
    pub r_sum: Compensated,
    pub m_of_x: Compensated,
    pub u_of_x: Option<Compensated>,
    pub prime_part: Compensated,
    pub n_log_g: Compensated,
    /// Largest accumulation error bound among the real-valued fields.
    pub err_bound: f64,
}

impl CheckpointSums {
    /// `(log α)·S1 + d·S2 + S3`, the split of `prime_part` along the profile.
    pub fn decomposition(&self, model: &PrimeModel) -> f64 {
        model.alpha.ln() * self.s1 as f64 + model.d * self.s2.get() + self.s3.get()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SumsReport {
    pub model: String,
    pub fingerprint: String,
    pub rows: Vec<CheckpointSums>,
}

impl SumsReport {
    pub fn row(&self, n: u64) -> Option<&CheckpointSums> {
        self.rows.iter().find(|r| r.n == n)
    }
}

#[derive(Debug, Clone, Default)]
struct PrimeAcc {
    s1: u64,
    s2: NeumaierSum,
    s3: NeumaierSum,
    f1: NeumaierSum,
    r: NeumaierSum,
    m: NeumaierSum,
    prime_part: NeumaierSum,
}

impl PrimeAcc {
    fn merge(&mut self, o: &PrimeAcc) {
        self.s1 += o.s1;
        self.s2.merge(&o.s2);
        self.s3.merge(&o.s3);
        self.f1.merge(&o.f1);
        self.r.merge(&o.r);
        self.m.merge(&o.m);
        self.prime_part.merge(&o.prime_part);
    }
}

struct PrimeTerms {
    p: u64,
    log_p: f64,
    inv_p: f64,
    deviation: f64,
    log_f: f64,
}

fn prime_block(model: &PrimeModel, grid: &[u64], base: &[u64], (lo, hi): (u64, u64)) -> Vec<PrimeAcc> {
    let primes = sieve_segment(base, lo, hi);
    let exact_lead = model.exact_leading_term();
    let terms: Vec<PrimeTerms> = primes
        .iter()
        .map(|&p| PrimeTerms {
            p,
            log_p: (p as f64).ln(),
            inv_p: 1.0 / p as f64,
            deviation: if exact_lead { 0.0 } else { model.log_deviation(p) },
            log_f: model.log_at_prime(p),
        })
        .collect();
    let mut out = vec![PrimeAcc::default(); grid.len()];
    for (acc, &n) in out.iter_mut().zip(grid) {
        if n < lo {
            continue;
        }
        let count = primes.partition_point(|&p| p <= n);
        for t in &terms[..count] {
            let q = n / t.p;
            let frac = (n % t.p) as f64 / t.p as f64;
            let qf = q as f64;
            acc.s1 += q;
            acc.s2.add(qf * t.log_p);
            if !exact_lead {
                acc.s3.add(qf * t.deviation);
            }
            acc.f1.add(frac);
            acc.r.add(frac * t.log_p);
            acc.m.add(t.log_p * t.inv_p);
            acc.prime_part.add(qf * t.log_f);
        }
    }
    out
}

/// `log κ(k) / log k` summed over `k ∈ [max(lo,2), hi]`, snapshotted at each
/// checkpoint.
fn u_block(grid: &[u64], base_all: &[u64], (lo, hi): (u64, u64)) -> Vec<NeumaierSum> {
    let start = lo.max(2);
    let mut out = vec![NeumaierSum::new(); grid.len()];
    if start > hi {
        return out;
    }
    let len = (hi - start + 1) as usize;
    let mut kern = vec![1u64; len];
    let mut part = vec![1u64; len];
    for &p in base_all {
        if p * p > hi {
            break;
        }
        let first = start.div_ceil(p) * p;
        let mut m = first;
        while m <= hi {
            let i = (m - start) as usize;
            kern[i] *= p;
            part[i] *= p;
            m += p;
        }
        let mut pk = p * p;
        while pk <= hi {
            let mut m = start.div_ceil(pk) * pk;
            while m <= hi {
                part[(m - start) as usize] *= p;
                m += pk;
            }
            match pk.checked_mul(p) {
                Some(v) => pk = v,
                None => break,
            }
        }
    }
    let mut running = NeumaierSum::new();
    let mut next_cp = grid.partition_point(|&n| n < start);
    for (i, k) in (start..=hi).enumerate() {
        let rest = k / part[i];
        let kappa = if rest > 1 { kern[i] * rest } else { kern[i] };
        let term = if kappa == k {
            1.0
        } else {
            (kappa as f64).ln() / (k as f64).ln()
        };
        running.add(term);
        while next_cp < grid.len() && grid[next_cp] == k {
            out[next_cp] = running;
            next_cp += 1;
        }
    }
    for slot in out.iter_mut().skip(next_cp) {
        *slot = running;
    }
    out
}

/// Evaluate `f` on every range and concatenate the per-range vectors in
/// range order, regardless of which thread produced them.
fn run_blocks<T, F>(ranges: &[(u64, u64)], parallel: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn((u64, u64)) -> Vec<T> + Sync,
{
    let partials: Vec<Vec<T>> = if parallel {
        ranges.par_iter().map(|&r| f(r)).collect()
    } else {
        ranges.iter().map(|&r| f(r)).collect()
    };
    partials.into_iter().flatten().collect()
}

/// One sieve pass over the primes up to `max(grid)` recording every field
/// of [`CheckpointSums`] at every checkpoint.
///
/// The prime range is cut into the fixed segments of
/// [`segment_ranges`]; per-segment partial sums are merged in ascending
/// segment order, so the parallel and sequential runs agree bit for bit.
pub fn sums_stream(model: &PrimeModel, grid: &CheckpointGrid, opts: &StreamOptions) -> Result<SumsReport> {
    grid.check_bound(&opts.sieve)?;
    let points = grid.points();
    let n_max = grid.max();
    let base = base_primes(n_max);
    let ranges = segment_ranges(2, n_max, opts.sieve.segment_size);
    let width = points.len();

    let flat = run_blocks(&ranges, opts.parallel, |r| prime_block(model, points, &base, r));
    let mut acc = vec![PrimeAcc::default(); width];
    for block in flat.chunks(width) {
        for (a, b) in acc.iter_mut().zip(block) {
            a.merge(b);
        }
    }

    // prime powers p^a ≤ n, a ≥ 2
    let mut f2_pp = vec![NeumaierSum::new(); width];
    let mut g_pp = vec![NeumaierSum::new(); width];
    let small = primes_up_to(crate::sieve::isqrt(n_max));
    for &p in &small {
        let mut pa = p * p;
        let mut a = 2u32;
        while pa <= n_max {
            let ratio = model.log_ratio_prime_power(p, a);
            for (ci, &n) in points.iter().enumerate() {
                if n < pa {
                    continue;
                }
                f2_pp[ci].add((n % pa) as f64 / pa as f64);
                if !model.strongly_multiplicative {
                    g_pp[ci].add((n / pa) as f64 * ratio);
                }
            }
            a += 1;
            match pa.checked_mul(p) {
                Some(v) => pa = v,
                None => break,
            }
        }
    }

    let u: Option<Vec<NeumaierSum>> = if opts.with_u {
        let mut base_all = vec![2u64];
        base_all.extend_from_slice(&base);
        let flat = run_blocks(&ranges, opts.parallel, |r| u_block(points, &base_all, r));
        let mut u = vec![NeumaierSum::new(); width];
        for block in flat.chunks(width) {
            for (a, b) in u.iter_mut().zip(block) {
                a.merge(b);
            }
        }
        Some(u)
    } else {
        None
    };

    let rows = points
        .iter()
        .enumerate()
        .map(|(ci, &n)| {
            let a = &acc[ci];
            let mut f2 = a.f1;
            f2.merge(&f2_pp[ci]);
            let mut g = a.prime_part;
            g.merge(&g_pp[ci]);
            let u_ci = u.as_ref().map(|u| u[ci]);
            let err_bound = [a.s2, a.s3, a.f1, f2, a.r, a.m, a.prime_part, g]
                .iter()
                .chain(u_ci.iter())
                .map(NeumaierSum::error_bound)
                .fold(0.0, f64::max);
            CheckpointSums {
                n,
                s1: a.s1,
                s2: a.s2.compensated(),
                s3: a.s3.compensated(),
                f1: a.f1.compensated(),
                f2: f2.compensated(),
                r_sum: a.r.compensated(),
                m_of_x: a.m.compensated(),
                u_of_x: u_ci.map(|s| s.compensated()),
                prime_part: a.prime_part.compensated(),
                n_log_g: g.compensated(),
                err_bound,
            }
        })
        .collect();
    Ok(SumsReport {
        model: model.name.clone(),
        fingerprint: model.fingerprint(),
        rows,
    })
}

/// `n·log G_f(n)` through the prime-power identity, using a caller-supplied
/// ascending prime list that must contain every prime `≤ n`.
pub fn log_geomean_identity_with(model: &PrimeModel, n: u64, primes: &[u64]) -> Result<Summed> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let mut s = NeumaierSum::new();
    let count = primes.partition_point(|&p| p <= n);
    for &p in &primes[..count] {
        s.add((n / p) as f64 * model.log_at_prime(p));
    }
    if !model.strongly_multiplicative {
        for &p in &primes[..count] {
            let Some(mut pa) = p.checked_mul(p) else { break };
            if pa > n {
                break;
            }
            let mut a = 2;
            while pa <= n {
                s.add((n / pa) as f64 * model.log_ratio_prime_power(p, a));
                a += 1;
                match pa.checked_mul(p) {
                    Some(v) => pa = v,
                    None => break,
                }
            }
        }
    }
    Ok(s.summed())
}

/// `n·log G_f(n) = Σ_{p≤n} ⌊n/p⌋ log f(p) + Σ_{p^a≤n, a≥2} ⌊n/p^a⌋ log(f(p^a)/f(p^(a−1)))`.
pub fn log_geomean_identity(model: &PrimeModel, n: u64, config: &SieveConfig) -> Result<Summed> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    config.check(n)?;
    let primes = primes_up_to(n);
    log_geomean_identity_with(model, n, &primes)
}

/// Compensated prefix sums `Σ_{k≤m} log f(k)` for `m = 0..=n` (entry 0 is 0).
pub fn log_geomean_bruteforce_prefix(model: &PrimeModel, n: u64, table: &SpfTable) -> Result<Vec<f64>> {
    if n > table.limit() {
        return Err(Error::SpfCap {
            requested: n,
            cap: table.limit(),
        });
    }
    let mut s = NeumaierSum::new();
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(0.0);
    for k in 1..=n {
        s.add(value_at(model, k, table).log_value);
        out.push(s.value());
    }
    Ok(out)
}

/// `Σ_{k≤n} log f(k)` straight from the definition.
pub fn log_geomean_bruteforce(model: &PrimeModel, n: u64, table: &SpfTable) -> Result<Summed> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if n > table.limit() {
        return Err(Error::SpfCap {
            requested: n,
            cap: table.limit(),
        });
    }
    let s: NeumaierSum = (1..=n).map(|k| value_at(model, k, table).log_value).collect();
    Ok(s.summed())
}

/// `Σ_{k≤n} ω(k)`.
pub fn omega_summatory(n: u64, table: &SpfTable) -> Result<u64> {
    if n > table.limit() {
        return Err(Error::SpfCap {
            requested: n,
            cap: table.limit(),
        });
    }
    Ok((2..=n).map(|k| table.omega(k) as u64).sum())
}

/// `U(x) = Σ_{2≤k≤x} log κ(k) / log k`. `k = 1` is left out.
pub fn u_of_x(x: u64, table: &SpfTable) -> Result<Summed> {
    if x < 2 {
        return Err(Error::InvalidArgument(format!("U(x) needs x >= 2, got {x}")));
    }
    if x > table.limit() {
        return Err(Error::SpfCap {
            requested: x,
            cap: table.limit(),
        });
    }
    let s: NeumaierSum = (2..=x)
        .map(|k| {
            let kappa = table.kernel(k);
            if kappa == k {
                1.0
            } else {
                (kappa as f64).ln() / (k as f64).ln()
            }
        })
        .collect();
    Ok(s.summed())
}

/// `R(n) = Σ_{p≤n} {n/p} log p`.
pub fn r_sum(n: u64) -> Result<Summed> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("R(n) needs n >= 2, got {n}")));
    }
    let s: NeumaierSum = primes_up_to(n)
        .into_iter()
        .map(|p| (n % p) as f64 / p as f64 * (p as f64).ln())
        .collect();
    Ok(s.summed())
}

/// `M(x) = Σ_{p≤x} log p / p`.
pub fn mertens_m_of_x(x: u64) -> Result<Summed> {
    if x < 2 {
        return Err(Error::InvalidArgument(format!("M(x) needs x >= 2, got {x}")));
    }
    let s: NeumaierSum = primes_up_to(x)
        .into_iter()
        .map(|p| (p as f64).ln() / p as f64)
        .collect();
    Ok(s.summed())
}

/// `M(x)` at many `x` in one ascending pass. `xs` must be sorted.
pub fn mertens_m_batch(xs: &[u64], config: &SieveConfig) -> Result<Vec<f64>> {
    if xs.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("x values must be ascending".into()));
    }
    let Some(&x_max) = xs.last() else {
        return Ok(Vec::new());
    };
    config.check(x_max)?;
    let mut out = Vec::with_capacity(xs.len());
    let mut s = NeumaierSum::new();
    let mut i = 0;
    while i < xs.len() && xs[i] < 2 {
        out.push(0.0);
        i += 1;
    }
    if x_max >= 2 {
        for p in crate::sieve::stream_segmented(2, x_max, config.segment_size, config)? {
            while i < xs.len() && xs[i] < p {
                out.push(s.value());
                i += 1;
            }
            s.add((p as f64).ln() / p as f64);
        }
    }
    while i < xs.len() {
        out.push(s.value());
        i += 1;
    }
    Ok(out)
}

/// Outcome of the two-sided bound
/// `log x + E − 1/(2 log x) < M(x) < log x + E + 1/(2 log x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RsCheck {
    pub x: u64,
    pub m_of_x: f64,
    pub lower: f64,
    pub upper: f64,
    pub left_holds: bool,
    /// Only evaluated for `x ≥ 319`, where the upper bound is asserted.
    pub right_holds: Option<bool>,
}

impl RsCheck {
    pub fn holds(&self) -> bool {
        self.left_holds && self.right_holds.unwrap_or(true)
    }
}

pub const RS_UPPER_FROM: u64 = 319;

/// Evaluate the bound at `x` given `M(x)` and the constant `E`.
pub fn rs_check_value(x: u64, m_of_x: f64, e: f64) -> RsCheck {
    let lx = (x as f64).ln();
    let lower = lx + e - 1.0 / (2.0 * lx);
    let upper = lx + e + 1.0 / (2.0 * lx);
    RsCheck {
        x,
        m_of_x,
        lower,
        upper,
        left_holds: lower < m_of_x,
        right_holds: (x >= RS_UPPER_FROM).then_some(m_of_x < upper),
    }
}

/// `true` iff the bound holds at `x` (upper side only for `x ≥ 319`).
pub fn rs_inequality_check(x: u64, e: f64) -> Result<bool> {
    let m = mertens_m_of_x(x)?;
    Ok(rs_check_value(x, m.value, e).holds())
}

#[cfg(test)]
mod tests;
