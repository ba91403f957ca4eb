//! Prime generation: a plain odd-only sieve for small limits, a segmented
//! odd-only sieve for everything else, and a smallest-prime-factor table
//! for the brute-force oracles.
//!
//! Segments are independent once the base primes (odd primes up to √hi)
//! are known, so a parallel driver can sieve disjoint segments on different
//! threads. Whoever does that must merge per-segment results in ascending
//! segment order; [`segment_ranges`] fixes the partition so the merge order
//! never depends on the thread count.

use crate::error::{Error, Result};

pub const DEFAULT_MAX_BOUND: u64 = 1_000_000_000;
pub const DEFAULT_SEGMENT_SIZE: u64 = 1 << 20;
pub const DEFAULT_SPF_CAP: u64 = 10_000_000;

/// Below this the whole range is sieved in one buffer.
const SMALL_SIEVE_LIMIT: u64 = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SieveConfig {
    /// Largest `hi` any sieve may be asked for.
    pub max_bound: u64,
    /// Numbers (not bytes) covered by one segment.
    pub segment_size: u64,
}

impl Default for SieveConfig {
    fn default() -> Self {
        Self {
            max_bound: DEFAULT_MAX_BOUND,
            segment_size: DEFAULT_SEGMENT_SIZE,
        }
    }
}

impl SieveConfig {
    pub fn check(&self, hi: u64) -> Result<()> {
        if hi > self.max_bound {
            return Err(Error::SieveBound {
                requested: hi,
                limit: self.max_bound,
            });
        }
        Ok(())
    }
}

pub fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Odd-only Eratosthenes over `[0, limit]` in a single buffer.
fn small_sieve(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let half = ((limit - 1) / 2) as usize; // odd numbers 3..=limit
    let mut composite = vec![false; half + 1];
    let mut i = 1usize;
    while (2 * i + 1) * (2 * i + 1) <= limit as usize {
        if !composite[i] {
            let p = 2 * i + 1;
            let mut j = (p * p - 1) / 2;
            while j <= half {
                composite[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    let mut out = Vec::with_capacity(estimate_count(limit));
    out.push(2);
    out.extend((1..=half).filter(|&i| !composite[i]).map(|i| (2 * i + 1) as u64));
    out
}

fn estimate_count(limit: u64) -> usize {
    if limit < 100 {
        return 32;
    }
    let x = limit as f64;
    (1.26 * x / x.ln()) as usize
}

/// Odd primes up to `√hi`, the only primes needed to sieve any segment
/// ending at or below `hi`.
pub fn base_primes(hi: u64) -> Vec<u64> {
    let mut b = small_sieve(isqrt(hi));
    if !b.is_empty() {
        b.remove(0);
    }
    b
}

/// Primes in the closed window `[lo, hi]`. `base` must hold every odd prime
/// up to `√hi` (extra entries are ignored).
pub fn sieve_segment(base: &[u64], lo: u64, hi: u64) -> Vec<u64> {
    let mut out = Vec::new();
    sieve_segment_into(base, lo, hi, &mut Vec::new(), &mut out);
    out
}

fn sieve_segment_into(base: &[u64], lo: u64, hi: u64, buf: &mut Vec<bool>, out: &mut Vec<u64>) {
    out.clear();
    if hi < 2 || lo > hi {
        return;
    }
    if lo <= 2 {
        out.push(2);
    }
    let start = if lo <= 3 { 3 } else { lo | 1 };
    if start > hi {
        return;
    }
    let len = ((hi - start) / 2 + 1) as usize;
    buf.clear();
    buf.resize(len, false);
    for &p in base {
        let sq = p * p;
        if sq > hi {
            break;
        }
        let mut m = if sq >= start { sq } else { start.div_ceil(p) * p };
        if m % 2 == 0 {
            m += p;
        }
        let mut j = ((m - start) / 2) as usize;
        let step = p as usize;
        while j < len {
            buf[j] = true;
            j += step;
        }
    }
    out.extend(
        buf.iter()
            .enumerate()
            .filter(|(_, &c)| !c)
            .map(|(i, _)| start + 2 * i as u64),
    );
}

/// All primes `≤ limit`, ascending.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit <= SMALL_SIEVE_LIMIT {
        return small_sieve(limit);
    }
    let mut out = Vec::with_capacity(estimate_count(limit));
    let stream = PrimeStream::unchecked(2, limit, DEFAULT_SEGMENT_SIZE);
    out.extend(stream);
    out
}

/// The fixed partition of `[lo, hi]` into segments of `segment_size`
/// numbers. Parallel drivers process exactly these ranges and merge in this
/// order.
pub fn segment_ranges(lo: u64, hi: u64, segment_size: u64) -> Vec<(u64, u64)> {
    let seg = segment_size.max(2);
    let mut out = Vec::new();
    let mut a = lo;
    while a <= hi {
        let b = hi.min(a.saturating_add(seg - 1));
        out.push((a, b));
        if b == u64::MAX {
            break;
        }
        a = b + 1;
    }
    out
}

/// Streaming iterator over the primes in `[lo, hi]`, sieving one segment at
/// a time. Memory is `O(segment_size + √hi)`.
#[derive(Debug)]
pub struct PrimeStream {
    hi: u64,
    segment_size: u64,
    base: Vec<u64>,
    next_lo: u64,
    buf: Vec<bool>,
    current: Vec<u64>,
    pos: usize,
}

impl PrimeStream {
    fn unchecked(lo: u64, hi: u64, segment_size: u64) -> Self {
        Self {
            hi,
            segment_size: segment_size.max(2),
            base: base_primes(hi),
            next_lo: lo.max(2),
            buf: Vec::new(),
            current: Vec::new(),
            pos: 0,
        }
    }

    pub fn segment_size(&self) -> u64 {
        self.segment_size
    }
}

impl Iterator for PrimeStream {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        loop {
            if self.pos < self.current.len() {
                let p = self.current[self.pos];
                self.pos += 1;
                return Some(p);
            }
            if self.next_lo > self.hi {
                return None;
            }
            let lo = self.next_lo;
            let hi = self.hi.min(lo + self.segment_size - 1);
            sieve_segment_into(&self.base, lo, hi, &mut self.buf, &mut self.current);
            self.pos = 0;
            self.next_lo = hi + 1;
        }
    }
}

/// Primes in `[lo, hi]` as a stream, validated against `config.max_bound`.
pub fn stream_segmented(lo: u64, hi: u64, segment_size: u64, config: &SieveConfig) -> Result<PrimeStream> {
    if lo < 2 || lo > hi {
        return Err(Error::InvalidArgument(format!(
            "stream range requires 2 <= lo <= hi, got [{lo}, {hi}]"
        )));
    }
    if segment_size < 2 {
        return Err(Error::InvalidArgument("segment size must be at least 2".into()));
    }
    config.check(hi)?;
    Ok(PrimeStream::unchecked(lo, hi, segment_size))
}

/// Smallest-prime-factor table for `2 ≤ k ≤ limit`.
#[derive(Debug, Clone)]
pub struct SpfTable {
    limit: u64,
    spf: Vec<u32>,
}

impl SpfTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Smallest prime factor of `k` (`2 ≤ k ≤ limit`).
    pub fn spf(&self, k: u64) -> u64 {
        self.spf[k as usize] as u64
    }

    pub fn is_prime(&self, k: u64) -> bool {
        k >= 2 && self.spf(k) == k
    }

    /// Prime factorization as ascending `(prime, exponent)` pairs; empty for
    /// `k < 2`.
    pub fn factorize(&self, k: u64) -> Vec<(u64, u32)> {
        assert!(k <= self.limit, "factorize: {k} beyond table limit {}", self.limit);
        let mut out = Vec::new();
        let mut m = k;
        while m >= 2 {
            let p = self.spf(m);
            let mut e = 0;
            while m.is_multiple_of(p) {
                m /= p;
                e += 1;
            }
            out.push((p, e));
        }
        out
    }

    /// Square-free kernel `∏_{p|k} p`, with `kernel(1) = 1`.
    pub fn kernel(&self, k: u64) -> u64 {
        let mut m = k;
        let mut out = 1;
        while m >= 2 {
            let p = self.spf(m);
            out *= p;
            while m.is_multiple_of(p) {
                m /= p;
            }
        }
        out
    }

    /// Number of distinct prime factors.
    pub fn omega(&self, k: u64) -> u32 {
        let mut m = k;
        let mut w = 0;
        while m >= 2 {
            let p = self.spf(m);
            w += 1;
            while m.is_multiple_of(p) {
                m /= p;
            }
        }
        w
    }
}

/// Build a table up to `limit` under the default cap.
pub fn spf_build(limit: u64) -> Result<SpfTable> {
    spf_build_capped(limit, DEFAULT_SPF_CAP)
}

pub fn spf_build_capped(limit: u64, cap: u64) -> Result<SpfTable> {
    if limit < 2 {
        return Err(Error::InvalidArgument(format!(
            "spf table needs limit >= 2, got {limit}"
        )));
    }
    if limit > cap {
        return Err(Error::SpfCap { requested: limit, cap });
    }
    let n = limit as usize;
    let mut spf = vec![0u32; n + 1];
    let mut primes: Vec<u32> = Vec::with_capacity(estimate_count(limit));
    // linear sieve: each composite is written exactly once, by its spf
    for i in 2..=n {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u32);
        }
        let si = spf[i];
        for &p in &primes {
            if p > si || i * p as usize > n {
                break;
            }
            spf[i * p as usize] = p;
        }
    }
    Ok(SpfTable { limit, spf })
}

/// Free-function form of [`SpfTable::factorize`].
pub fn factorize(k: u64, table: &SpfTable) -> Vec<(u64, u32)> {
    table.factorize(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_primes(limit: usize) -> Vec<u64> {
        let mut is = vec![true; limit + 1];
        let mut out = Vec::new();
        for i in 2..=limit {
            if is[i] {
                out.push(i as u64);
                let mut j = i * i;
                while j <= limit {
                    is[j] = false;
                    j += i;
                }
            }
        }
        out
    }

    #[test]
    fn small_limits() {
        assert_eq!(primes_up_to(10), vec![2, 3, 5, 7]);
        assert!(primes_up_to(1).is_empty());
        assert!(primes_up_to(0).is_empty());
        assert_eq!(primes_up_to(2), vec![2]);
        assert_eq!(primes_up_to(3), vec![2, 3]);
    }

    #[test]
    fn count_to_a_million() {
        let naive = naive_primes(1_000_000);
        assert_eq!(naive.len(), 78498);
        assert_eq!(primes_up_to(1_000_000), naive);
    }

    #[test]
    fn large_path_matches_small_path() {
        let limit = SMALL_SIEVE_LIMIT + 12_345;
        let big = primes_up_to(limit);
        assert_eq!(big, small_sieve(limit));
    }

    #[test]
    fn stream_windows() {
        let cfg = SieveConfig::default();
        let v: Vec<u64> = stream_segmented(2, 30, 16, &cfg).unwrap().collect();
        assert_eq!(v, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        let v: Vec<u64> = stream_segmented(20, 30, 8, &cfg).unwrap().collect();
        assert_eq!(v, vec![23, 29]);
        let v: Vec<u64> = stream_segmented(2, 2, 2, &cfg).unwrap().collect();
        assert_eq!(v, vec![2]);
    }

    #[test]
    fn stream_rejects_bad_ranges() {
        let cfg = SieveConfig {
            max_bound: 1000,
            segment_size: 64,
        };
        assert!(matches!(
            stream_segmented(2, 1001, 64, &cfg),
            Err(Error::SieveBound { .. })
        ));
        assert!(stream_segmented(1, 10, 64, &cfg).is_err());
        assert!(stream_segmented(11, 10, 64, &cfg).is_err());
    }

    #[test]
    fn stream_equals_full_sieve_for_all_segment_sizes() {
        let n = 5000;
        let want = naive_primes(n as usize);
        for s in 2..80 {
            let got: Vec<u64> = stream_segmented(2, n, s, &SieveConfig::default()).unwrap().collect();
            assert_eq!(got, want, "segment size {s}");
        }
    }

    #[test]
    fn segment_ranges_tile_the_interval() {
        let r = segment_ranges(2, 100, 16);
        assert_eq!(r.first(), Some(&(2, 17)));
        assert_eq!(r.last().unwrap().1, 100);
        for w in r.windows(2) {
            assert_eq!(w[0].1 + 1, w[1].0);
        }
    }

    #[test]
    fn spf_examples() {
        let t = spf_build(10_000).unwrap();
        assert_eq!(t.spf(12), 2);
        assert_eq!(t.spf(49), 7);
        // 9973 is prime: no divisor up to its square root
        assert!((2..=99u64).all(|d| 9973 % d != 0));
        assert_eq!(t.spf(9973), 9973);
        assert!(spf_build(1).is_err());
        assert!(matches!(spf_build_capped(1000, 999), Err(Error::SpfCap { .. })));
    }

    #[test]
    fn spf_primes_agree_with_sieve() {
        for limit in [2u64, 3, 10, 97, 1000, 65_536, 100_000] {
            let t = spf_build(limit).unwrap();
            let from_spf: Vec<u64> = (2..=limit).filter(|&k| t.is_prime(k)).collect();
            assert_eq!(from_spf, primes_up_to(limit), "limit {limit}");
        }
    }

    #[test]
    fn factorize_examples() {
        let t = spf_build(200_000).unwrap();
        assert_eq!(factorize(12, &t), vec![(2, 2), (3, 1)]);
        assert_eq!(factorize(7, &t), vec![(7, 1)]);
        assert_eq!(2u64.pow(5) * 3u64.pow(3) * 25 * 7, 151_200);
        assert_eq!(factorize(151_200, &t), vec![(2, 5), (3, 3), (5, 2), (7, 1)]);
        assert!(factorize(1, &t).is_empty());
    }

    #[test]
    fn factorize_recomposes() {
        let t = spf_build(100_000).unwrap();
        for k in 1..=100_000u64 {
            let f = t.factorize(k);
            assert!(f.windows(2).all(|w| w[0].0 < w[1].0));
            assert!(f.iter().all(|&(p, e)| e >= 1 && t.is_prime(p)));
            let back: u64 = f.iter().map(|&(p, e)| p.pow(e)).product();
            assert_eq!(back, k);
        }
    }

    #[test]
    fn spf_invariants() {
        let t = spf_build(50_000).unwrap();
        for k in 2..=50_000u64 {
            let p = t.spf(k);
            assert_eq!(k % p, 0);
            assert!(t.is_prime(p));
        }
    }

    #[test]
    fn isqrt_edges() {
        for n in [0u64, 1, 3, 4, 15, 16, 17, 999_999_999_999, u32::MAX as u64 * 3] {
            let r = isqrt(n);
            assert!(r * r <= n && (r + 1) * (r + 1) > n);
        }
    }
}
