//! Named numerical checks. Each returns a [`CheckOutcome`] with the measured
//! quantities, so callers can print or serialize them.
//!
//! | name | what is checked |
//! |---|---|
//! | `identity-oracle` | prime-power identity vs `Σ log f(k)`, every built-in, `n ≤ to` |
//! | `omega-identity` | `Σ_{k≤n} ω(k) = S1(n)` |
//! | `kappa-s2-identity` | `Σ_{k≤n} log κ(k) = S2(n)` |
//! | `smr-identity` | `S2(n) = n M(n) − R(n)` |
//! | `a1-gamma` | `a_1 = γ − 1` by quadrature vs Euler–Maclaurin |
//! | `constants-stability` | M, E by prime series vs limit definition; doubling the cut |
//! | `rs-inequality` | `log x + E ∓ 1/(2 log x)` bracket `M(x)` |
//! | `saffari-trend` | `(S1/n − log log n − M) log n → γ − 1` |
//! | `s2-constant` | `S2/n − log n → γ + E − 1`, scaled residual stabilizes |
//! | `kappa-corollary` | `G_κ(n)/n → e^(γ+E−1)`, scaled residual stabilizes |
//! | `phi-constant` | `log G_φ(n) − log n → log(e^(−1) ρ_φ)` |
//! | `eta0-fit` | fitted constant of the `jordan_2` prime sum vs `η₀` |
//! | `series-algebra` | exp/log round trip, `L_j` recurrence, `S2` coefficient transform |
//! | `determinism` | identity sweep, parallel vs sequential, byte-identical cache files |

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;

use crate::constants::{self, ConstantValue, Precisions};
use crate::error::{Error, Result};
use crate::multfunc::{builtin, BUILTIN_NAMES};
use crate::primesums::cache::{self, ReportCache};
use crate::primesums::{self, CheckpointGrid, StreamOptions, SumsReport};
use crate::series;
use crate::sieve::{primes_up_to, spf_build, SieveConfig};

pub const CHECK_NAMES: [&str; 14] = [
    "identity-oracle",
    "omega-identity",
    "kappa-s2-identity",
    "smr-identity",
    "a1-gamma",
    "constants-stability",
    "rs-inequality",
    "saffari-trend",
    "s2-constant",
    "kappa-corollary",
    "phi-constant",
    "eta0-fit",
    "series-algebra",
    "determinism",
];

/// Relative spread allowed for scaled residuals that should settle on a
/// nonzero coefficient.
pub const STABILIZATION_TOL: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    pub detail: String,
    pub metrics: BTreeMap<String, f64>,
}

impl CheckOutcome {
    fn new(name: &str) -> Self {
        Self {
            name: name.into(),
            pass: true,
            detail: String::new(),
            metrics: BTreeMap::new(),
        }
    }

    fn metric(&mut self, key: &str, v: f64) {
        self.metrics.insert(key.into(), v);
    }

    /// Record a sub-condition; the outcome passes only if all do.
    fn require(&mut self, label: &str, ok: bool) {
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        self.detail.push_str(label);
        self.detail.push_str(if ok { ": ok" } else { ": FAILED" });
        self.pass &= ok;
    }
}

/// Optional grid overrides for a check; `None` picks the check's default.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CheckParams {
    pub from: Option<u64>,
    pub to: Option<u64>,
    pub points: Option<usize>,
}

type ReportKey = (String, Vec<u64>);

/// Runs checks, sharing expensive prime sums and constants between them.
pub struct Verifier {
    pub sieve: SieveConfig,
    pub parallel: bool,
    pub precisions: Precisions,
    pub cache: Option<ReportCache>,
    reports: Mutex<HashMap<ReportKey, Arc<SumsReport>>>,
    mertens_e: OnceLock<ConstantValue>,
    meissel_mertens: OnceLock<ConstantValue>,
    gamma: OnceLock<ConstantValue>,
}

impl Default for Verifier {
    fn default() -> Self {
        Self::new(SieveConfig::default(), false, Precisions::default(), None)
    }
}

fn log_grid(from: u64, to: u64, points: usize) -> Result<Vec<u64>> {
    Ok(CheckpointGrid::log_spaced(from, to, points)?.points().to_vec())
}

/// Mean-relative spread `(max − min)/|mean|`.
fn relative_spread(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    (max - min) / mean.abs()
}

impl Verifier {
    pub fn new(sieve: SieveConfig, parallel: bool, precisions: Precisions, cache: Option<ReportCache>) -> Self {
        Self {
            sieve,
            parallel,
            precisions,
            cache,
            reports: Mutex::new(HashMap::new()),
            mertens_e: OnceLock::new(),
            meissel_mertens: OnceLock::new(),
            gamma: OnceLock::new(),
        }
    }

    fn opts(&self, with_u: bool) -> StreamOptions {
        StreamOptions {
            sieve: self.sieve,
            parallel: self.parallel,
            with_u,
        }
    }

    fn get_or<F: FnOnce() -> Result<ConstantValue>>(cell: &OnceLock<ConstantValue>, f: F) -> Result<ConstantValue> {
        if let Some(v) = cell.get() {
            return Ok(v.clone());
        }
        let v = f()?;
        Ok(cell.get_or_init(|| v).clone())
    }

    pub fn mertens_e(&self) -> Result<ConstantValue> {
        Self::get_or(&self.mertens_e, || {
            constants::mertens_e(self.precisions.mertens_e, &self.sieve)
        })
    }

    pub fn meissel_mertens(&self) -> Result<ConstantValue> {
        Self::get_or(&self.meissel_mertens, || {
            constants::meissel_mertens(self.precisions.meissel_mertens, &self.sieve)
        })
    }

    pub fn gamma(&self) -> Result<ConstantValue> {
        Self::get_or(&self.gamma, || constants::euler_gamma(self.precisions.gamma))
    }

    /// `γ + E − 1`.
    pub fn s2_constant(&self) -> Result<f64> {
        Ok(self.gamma()?.value + self.mertens_e()?.value - 1.0)
    }

    /// Prime sums for `model` on `points`, memoized and optionally cached on disk.
    pub fn report(&self, model: &str, points: Vec<u64>) -> Result<Arc<SumsReport>> {
        let key = (model.to_string(), points.clone());
        if let Some(r) = self.reports.lock().expect("poisoned").get(&key) {
            return Ok(Arc::clone(r));
        }
        let m = builtin(model)?;
        let grid = CheckpointGrid::new(points)?;
        let opts = self.opts(false);
        let report = match &self.cache {
            Some(c) => c.load_or_compute(&m, &grid, &opts)?,
            None => primesums::sums_stream(&m, &grid, &opts)?,
        };
        let report = Arc::new(report);
        self.reports.lock().expect("poisoned").insert(key, Arc::clone(&report));
        Ok(report)
    }

    /// Grid shared by the trend checks: `from`, then 13 log-spaced points
    /// over `[to/100, to]` (which include `to/10`).
    fn trend_report(&self, from: u64, to: u64) -> Result<Arc<SumsReport>> {
        let lo = to / 100;
        let mut pts = log_grid(lo.max(2), to, 13)?;
        if from < lo {
            pts.insert(0, from);
        }
        self.report("jordan_2", pts)
    }

    pub fn run(&self, name: &str, params: CheckParams) -> Result<CheckOutcome> {
        match name {
            "identity-oracle" => self.identity_oracle(params),
            "omega-identity" | "kappa-s2-identity" | "smr-identity" => self.exact_identity(name, params),
            "a1-gamma" => self.a1_gamma(),
            "constants-stability" => self.constants_stability(params),
            "rs-inequality" => self.rs_inequality(params),
            "saffari-trend" => self.saffari_trend(params),
            "s2-constant" => self.s2_constant_trend(params),
            "kappa-corollary" => self.kappa_corollary(params),
            "phi-constant" => self.phi_constant(params),
            "eta0-fit" => self.eta0_fit(params),
            "series-algebra" => Ok(series_algebra()),
            "determinism" => self.determinism(params),
            other => Err(Error::UnknownCheck(other.into())),
        }
    }

    fn identity_oracle(&self, p: CheckParams) -> Result<CheckOutcome> {
        let to = p.to.unwrap_or(5000);
        let mut out = CheckOutcome::new("identity-oracle");
        let table = spf_build(to)?;
        let primes = primes_up_to(to);
        for name in BUILTIN_NAMES {
            let m = builtin(name)?;
            let prefix = primesums::log_geomean_bruteforce_prefix(&m, to, &table)?;
            let mut worst: f64 = 0.0;
            for n in 1..=to {
                let id = primesums::log_geomean_identity_with(&m, n, &primes)?.value;
                worst = worst.max((id - prefix[n as usize]).abs() / (n as f64).max(1.0));
            }
            out.metric(&format!("{name}.max_scaled_err"), worst);
            out.require(&format!("{name} within 1e-9 n"), worst <= 1e-9);
        }
        Ok(out)
    }

    fn sweep_grid(p: CheckParams) -> Result<CheckpointGrid> {
        CheckpointGrid::log_spaced(p.from.unwrap_or(10), p.to.unwrap_or(1_000_000), p.points.unwrap_or(20))
    }

    fn exact_identity(&self, name: &str, p: CheckParams) -> Result<CheckOutcome> {
        let grid = Self::sweep_grid(p)?;
        let kappa = builtin("kappa")?;
        let report = primesums::sums_stream(&kappa, &grid, &self.opts(false))?;
        let mut out = CheckOutcome::new(name);
        let mut worst: f64 = 0.0;
        match name {
            "omega-identity" => {
                let table = spf_build(grid.max())?;
                let mut mismatches = 0;
                for row in &report.rows {
                    if primesums::omega_summatory(row.n, &table)? != row.s1 {
                        mismatches += 1;
                    }
                }
                out.metric("mismatches", mismatches as f64);
                out.require("Σω(k) = S1(n) at every point", mismatches == 0);
            }
            "kappa-s2-identity" => {
                let table = spf_build(grid.max())?;
                let prefix = primesums::log_geomean_bruteforce_prefix(&kappa, grid.max(), &table)?;
                for row in &report.rows {
                    worst = worst.max((prefix[row.n as usize] - row.s2.get()).abs() / row.n as f64);
                }
                out.metric("max_scaled_err", worst);
                out.require("Σ log κ(k) = S2(n) within 1e-9 n", worst <= 1e-9);
            }
            _ => {
                for row in &report.rows {
                    let n = row.n as f64;
                    let rhs = n * row.m_of_x.get() - row.r_sum.get();
                    worst = worst.max((row.s2.get() - rhs).abs() / n);
                }
                out.metric("max_scaled_err", worst);
                out.require("S2(n) = n M(n) − R(n) within 1e-9 n", worst <= 1e-9);
            }
        }
        out.metric("points", grid.len() as f64);
        Ok(out)
    }

    fn a1_gamma(&self) -> Result<CheckOutcome> {
        let mut out = CheckOutcome::new("a1-gamma");
        let a1 = constants::saffari_a(1, self.precisions.saffari)?;
        let g = self.gamma()?;
        let diff = (a1.value + 1.0 - g.value).abs();
        out.metric("a1", a1.value);
        out.metric("gamma", g.value);
        out.metric("abs_diff", diff);
        out.require("|a_1 + 1 − γ| ≤ 1e-8", diff <= 1e-8);
        Ok(out)
    }

    fn constants_stability(&self, p: CheckParams) -> Result<CheckOutcome> {
        let x_max = p.to.unwrap_or(100_000_000);
        let mut out = CheckOutcome::new("constants-stability");
        let lim = constants::limit_estimates(x_max, p.points.unwrap_or(33), &self.sieve)?;
        let m = self.meissel_mertens()?;
        let e = self.mertens_e()?;
        let dm = (m.value - lim.meissel_mertens.extrapolated).abs();
        let de = (e.value - lim.mertens_e.extrapolated).abs();
        out.metric("M", m.value);
        out.metric("M.tail_bound", m.tail_bound);
        out.metric("M.limit", lim.meissel_mertens.extrapolated);
        out.metric("M.limit_spread", lim.meissel_mertens.spread);
        out.metric("E", e.value);
        out.metric("E.tail_bound", e.tail_bound);
        out.metric("E.limit", lim.mertens_e.extrapolated);
        out.metric("E.limit_spread", lim.mertens_e.spread);
        out.metric("E.limit_raw", lim.mertens_e.raw);
        out.require("M two ways within 1e-6", dm <= 1e-6);
        out.require("E two ways within 1e-6", de <= 1e-6);

        let g = self.gamma()?;
        let m2 = constants::meissel_mertens_at(2 * m.params["P"] as u64, &g, &self.sieve)?;
        let e2 = constants::mertens_e_at(2 * e.params["P"] as u64, &g, &self.sieve)?;
        let mm = (m2.value - m.value).abs();
        let me = (e2.value - e.value).abs();
        out.metric("M.doubling_shift", mm);
        out.metric("E.doubling_shift", me);
        out.require("M doubling shift < tail bound", mm < m.tail_bound);
        out.require("E doubling shift < tail bound", me < e.tail_bound);
        Ok(out)
    }

    fn rs_inequality(&self, p: CheckParams) -> Result<CheckOutcome> {
        let from = p.from.unwrap_or(primesums::RS_UPPER_FROM);
        let to = p.to.unwrap_or(10_000_000);
        let points = p.points.unwrap_or(1000);
        let e = self.mertens_e()?.value;
        let mut xs: Vec<u64> = (2..from.min(primesums::RS_UPPER_FROM)).collect();
        let grid_xs: Vec<u64> = (0..points)
            .map(|i| {
                if points == 1 {
                    return to;
                }
                let t = i as f64 / (points - 1) as f64;
                ((from as f64).ln() * (1.0 - t) + (to as f64).ln() * t).exp().round() as u64
            })
            .collect();
        xs.extend(grid_xs);
        if xs.windows(2).any(|w| w[0] > w[1]) || from < 2 {
            return Err(Error::InvalidGrid(format!("bad range [{from}, {to}]")));
        }
        let ms = primesums::mertens_m_batch(&xs, &self.sieve)?;
        let (mut left_fail, mut right_fail, mut two_sided) = (0u64, 0u64, 0u64);
        let mut min_margin = f64::INFINITY;
        for (&x, &m) in xs.iter().zip(&ms) {
            let c = primesums::rs_check_value(x, m, e);
            left_fail += !c.left_holds as u64;
            if let Some(r) = c.right_holds {
                two_sided += 1;
                right_fail += !r as u64;
                min_margin = min_margin.min((m - c.lower).min(c.upper - m));
            }
        }
        out_rs(xs.len(), two_sided, left_fail, right_fail, min_margin)
    }

    /// Rows of the trend fixture at the given `n`.
    fn trend_rows(&self, p: CheckParams) -> Result<(Arc<SumsReport>, u64, u64)> {
        let from = p.from.unwrap_or(10_000);
        let to = p.to.unwrap_or(100_000_000);
        if to < 10_000 || from >= to / 100 {
            return Err(Error::InvalidGrid(format!(
                "trend checks need to >= 1e4 and from < to/100, got [{from}, {to}]"
            )));
        }
        Ok((self.trend_report(from, to)?, from, to))
    }

    fn saffari_trend(&self, p: CheckParams) -> Result<CheckOutcome> {
        let (rep, from, to) = self.trend_rows(p)?;
        let m = self.meissel_mertens()?.value;
        let target = self.gamma()?.value - 1.0;
        let eps = |n: u64| {
            let row = rep.row(n).expect("grid point");
            let nf = n as f64;
            let l = nf.ln();
            (row.s1 as f64 / nf - l.ln() - m) * l
        };
        let (hi, lo) = (eps(to), eps(from));
        let mut out = CheckOutcome::new("saffari-trend");
        out.metric("eps_hi", hi);
        out.metric("eps_lo", lo);
        out.metric("target", target);
        out.require("|ε(to) − (γ−1)| ≤ 0.1", (hi - target).abs() <= 0.1);
        out.require(
            "|ε(to) − (γ−1)| < |ε(from) − (γ−1)|",
            (hi - target).abs() < (lo - target).abs(),
        );
        Ok(out)
    }

    /// `r(n) = S2(n)/n − log n` at `from` and at `to/100, to/10, to`.
    fn r_values(&self, p: CheckParams) -> Result<(f64, [f64; 3], [u64; 3])> {
        let (rep, from, to) = self.trend_rows(p)?;
        let r = |n: u64| rep.row(n).expect("grid point").s2.get() / n as f64 - (n as f64).ln();
        let ns = [to / 100, to / 10, to];
        Ok((r(from), ns.map(r), ns))
    }

    fn s2_constant_trend(&self, p: CheckParams) -> Result<CheckOutcome> {
        let (r_lo, r, ns) = self.r_values(p)?;
        let c0 = self.s2_constant()?;
        let mut out = CheckOutcome::new("s2-constant");
        let scaled: Vec<f64> = r.iter().zip(&ns).map(|(v, &n)| (v - c0) * (n as f64).ln()).collect();
        out.metric("c0", c0);
        out.metric("r_hi", r[2]);
        out.metric("r_lo", r_lo);
        for (s, n) in scaled.iter().zip(ns) {
            out.metric(&format!("scaled_residual@{n}"), *s);
        }
        let spread = relative_spread(&scaled);
        out.metric("scaled_residual_spread", spread);
        out.require("|r(to) − c0| ≤ 0.1", (r[2] - c0).abs() <= 0.1);
        out.require("|r(to) − c0| < |r(from) − c0|", (r[2] - c0).abs() < (r_lo - c0).abs());
        out.require("scaled residual spread < 25%", spread < STABILIZATION_TOL);
        Ok(out)
    }

    fn kappa_corollary(&self, p: CheckParams) -> Result<CheckOutcome> {
        let (r_lo, r, ns) = self.r_values(p)?;
        let c0 = self.s2_constant()?;
        let target = c0.exp();
        // G_κ(n)/n = exp(S2(n)/n − log n).
        let ratio = r.map(f64::exp);
        let resid: Vec<f64> = ratio.iter().map(|g| g - target).collect();
        let scaled: Vec<f64> = resid.iter().zip(&ns).map(|(v, &n)| v * (n as f64).ln()).collect();
        let mut out = CheckOutcome::new("kappa-corollary");
        out.metric("target", target);
        for ((g, s), n) in ratio.iter().zip(&scaled).zip(ns) {
            out.metric(&format!("G/n@{n}"), *g);
            out.metric(&format!("scaled_residual@{n}"), *s);
        }
        let spread = relative_spread(&scaled);
        out.metric("scaled_residual_spread", spread);
        let shrinking = resid.windows(2).all(|w| w[1].abs() < w[0].abs())
            && (ratio[2] - target).abs() < (r_lo.exp() - target).abs();
        out.require("residual shrinks toward e^(γ+E−1)", shrinking);
        out.require("scaled residual spread < 25%", spread < STABILIZATION_TOL);
        Ok(out)
    }

    fn phi_constant(&self, p: CheckParams) -> Result<CheckOutcome> {
        let n = p.to.unwrap_or(1_000_000);
        let phi = builtin("euler_phi")?;
        let log_g = primesums::log_geomean_identity(&phi, n, &self.sieve)?.value / n as f64;
        let cq = constants::c_q(&phi, self.precisions.c_q, &self.sieve)?;
        let log_c = -1.0 + cq.value;
        let diff = (log_g - (n as f64).ln() - log_c).abs();
        let mut out = CheckOutcome::new("phi-constant");
        out.metric("log_G_minus_log_n", log_g - (n as f64).ln());
        out.metric("log_C", log_c);
        out.metric("abs_diff", diff);
        // The strongly multiplicative formula misses the prime-power part,
        // which for φ is exactly −(γ + E).
        out.metric("log_ratio_to_strong_formula", log_c - (self.s2_constant()? + cq.value));
        out.require("|log G_φ(n) − log n − log C| ≤ 1e-4", diff <= 1e-4);
        Ok(out)
    }

    fn eta0_fit(&self, p: CheckParams) -> Result<CheckOutcome> {
        let (rep, _, to) = self.trend_rows(p)?;
        let model = builtin("jordan_2")?;
        let samples: Vec<(u64, f64)> = rep
            .rows
            .iter()
            .filter(|r| r.n >= to / 100)
            .map(|r| {
                let nf = r.n as f64;
                let l = nf.ln();
                (r.n, r.prime_part.get() / nf - model.d * l - model.alpha.ln() * l.ln())
            })
            .collect();
        let fit = series::fit_coefficients(&samples, 1, true)?;
        let eta0 = constants::eta0(&model, 1e-6, &self.sieve)?;
        let c0 = fit.constant.expect("constant requested");
        let mut out = CheckOutcome::new("eta0-fit");
        out.metric("fitted_constant", c0);
        out.metric("fitted_c1", fit.coefficients[0]);
        out.metric("condition", fit.condition_estimate);
        out.metric("eta0", eta0.value);
        out.metric("abs_diff", (c0 - eta0.value).abs());
        out.require("|fitted constant − η₀| ≤ 0.1", (c0 - eta0.value).abs() <= 0.1);
        Ok(out)
    }

    fn determinism(&self, p: CheckParams) -> Result<CheckOutcome> {
        let grid = Self::sweep_grid(p)?;
        let kappa = builtin("kappa")?;
        let mut sieve = self.sieve;
        // Small segments so the parallel run really splits the range.
        sieve.segment_size = sieve.segment_size.min(1 << 16);
        let dir = std::env::temp_dir().join(format!(
            "primemean-determinism-{}-{:x}",
            std::process::id(),
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_nanos())
                .unwrap_or(0)
        ));
        std::fs::create_dir_all(&dir)?;
        let mut files = Vec::new();
        for parallel in [false, true] {
            let opts = StreamOptions {
                sieve,
                parallel,
                with_u: true,
            };
            let report = primesums::sums_stream(&kappa, &grid, &opts)?;
            let path = dir.join(format!("parallel-{parallel}.pmsm"));
            cache::write_report(&path, &report, &kappa)?;
            files.push(std::fs::read(&path)?);
        }
        let _ = std::fs::remove_dir_all(&dir);
        let mut out = CheckOutcome::new("determinism");
        out.metric("bytes", files[0].len() as f64);
        out.require("sequential and parallel files identical", files[0] == files[1]);
        Ok(out)
    }
}

fn out_rs(total: usize, two_sided: u64, left_fail: u64, right_fail: u64, min_margin: f64) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::new("rs-inequality");
    out.metric("points", total as f64);
    out.metric("two_sided_points", two_sided as f64);
    out.metric("left_failures", left_fail as f64);
    out.metric("right_failures", right_fail as f64);
    if min_margin.is_finite() {
        out.metric("min_two_sided_margin", min_margin);
    }
    out.require("left side everywhere", left_fail == 0);
    out.require("right side for x ≥ 319", right_fail == 0);
    Ok(out)
}

/// Floating-point formal log of a series with `g_0 = 1`.
fn series_log(g: &[f64]) -> Vec<f64> {
    let r = g.len() - 1;
    let mut l = vec![0.0; r + 1];
    for k in 1..=r {
        let mut acc = k as f64 * g[k];
        for j in 1..k {
            acc -= j as f64 * l[j] * g[k - j];
        }
        l[k] = acc / k as f64;
    }
    l
}

fn series_algebra() -> CheckOutcome {
    let mut out = CheckOutcome::new("series-algebra");
    let e: Vec<f64> = (1..=series::MAX_ORDER)
        .map(|j| ((j * 7) % 5) as f64 / 4.0 - 0.5)
        .collect();
    let g = series::series_exp(&e).expect("order within range");
    let back = series_log(&g);
    let worst = e.iter().zip(&back[1..]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    out.metric("exp_log_roundtrip_err", worst);
    out.require("exp/log round trip", worst < 1e-9);

    let rec = (2..=series::MAX_ORDER).all(|r| (2..=r).all(|j| series::lj_recurrence_check(j, r).unwrap_or(false)));
    out.require("L_j recurrence for 2 ≤ j ≤ r ≤ 12", rec);

    // Collect 1/log^i n terms of Σ d_(j+1)/log^j n − Σ d_j L_j(n)/n.
    let d: Vec<f64> = vec![0.5, -1.25, 2.0, 0.75, -3.0, 1.0, 0.25];
    let r = d.len() - 1;
    let mut want = vec![0.0; r + 1];
    for i in 1..=r {
        want[i] += d[i];
    }
    for j in 1..=r {
        let lj = series::lj_coeffs(j, r).expect("in range");
        for (off, c) in lj.iter().enumerate() {
            want[j + off] -= d[j - 1] * *c as f64;
        }
    }
    let got = series::s2_coeffs_from_d(&d).expect("in range");
    let ok = got.iter().zip(&want[1..]).all(|(a, b)| a == b);
    out.require("S2 coefficient transform", ok);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_check_is_reported() {
        let v = Verifier::default();
        assert!(matches!(
            v.run("nope", CheckParams::default()),
            Err(Error::UnknownCheck(_))
        ));
    }

    #[test]
    fn light_checks_pass() {
        let v = Verifier::default();
        for name in ["a1-gamma", "series-algebra"] {
            let o = v.run(name, CheckParams::default()).unwrap();
            assert!(o.pass, "{name}: {}", o.detail);
        }
        let small = CheckParams {
            from: Some(10),
            to: Some(20_000),
            points: Some(8),
        };
        for name in ["omega-identity", "kappa-s2-identity", "smr-identity", "determinism"] {
            let o = v.run(name, small).unwrap();
            assert!(o.pass, "{name}: {}", o.detail);
        }
        let o = v
            .run("identity-oracle", CheckParams { to: Some(300), ..small })
            .unwrap();
        assert!(o.pass, "{}", o.detail);
    }

    #[test]
    fn rs_small_range() {
        let v = Verifier::new(
            SieveConfig::default(),
            false,
            Precisions {
                mertens_e: 1e-5,
                ..Precisions::default()
            },
            None,
        );
        let p = CheckParams {
            from: Some(319),
            to: Some(100_000),
            points: Some(50),
        };
        let o = v.run("rs-inequality", p).unwrap();
        assert!(o.pass, "{}", o.detail);
        assert_eq!(o.metrics["two_sided_points"], 50.0);
    }

    #[test]
    fn relative_spread_basics() {
        assert_eq!(relative_spread(&[1.0, 1.0]), 0.0);
        assert!((relative_spread(&[1.0, 2.0, 3.0]) - 1.0).abs() < 1e-15);
    }
}
