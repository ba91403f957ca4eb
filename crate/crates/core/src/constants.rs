//! Constants of the geometric-mean expansions, each with a certified
//! truncation bound.
//!
//! | constant | evaluated as | tail bound |
//! |---|---|---|
//! | γ | `H_N − log N − 1/(2N) + 1/(12N²) − 1/(120N⁴)` | `1/(252 N⁶)` |
//! | M | `γ + Σ_{p≤P} [log(1−1/p) + 1/p]` | `1/(2P)` |
//! | E | `−γ − Σ_{p≤P} log p/(p(p−1))` | `(log(P+1) + 1)/P` |
//! | C_Q | `Σ_{p≤P} (1/p) log(f(p)/(α p^d))` | `(2K/α) P^(−δ)/δ` |
//! | a_j | `−∫_1^∞ {t} (log t)^(j−1) t^(−2) dt` | quadrature + Euler–Maclaurin tail |
//!
//! Every tail bound also absorbs the compensated-summation error bound of the
//! finite part. The limit definitions of M and E are evaluated separately by
//! [`limit_estimates`] for cross-checking.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use serde::Serialize;

use crate::accum::{NeumaierSum, UNIT_ROUNDOFF};
use crate::error::{Error, Result};
use crate::multfunc::PrimeModel;
use crate::sieve::{isqrt, primes_up_to, stream_segmented, SieveConfig};

pub const GAMMA_MIN_PRECISION: f64 = 1e-13;
pub const MERTENS_M_MIN_PRECISION: f64 = 1e-9;
pub const MERTENS_E_MIN_PRECISION: f64 = 1e-7;
pub const C_Q_MIN_PRECISION: f64 = 1e-9;
pub const SAFFARI_MIN_PRECISION: f64 = 1e-12;
pub const SAFFARI_MAX_J: u32 = 8;

/// A constant, its certified truncation bound, and how it was obtained.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantValue {
    pub name: String,
    pub value: f64,
    pub tail_bound: f64,
    pub method: String,
    /// Truncation points and other knobs used.
    pub params: BTreeMap<String, f64>,
}

impl ConstantValue {
    fn new(name: impl Into<String>, value: f64, tail_bound: f64, method: &str) -> Self {
        Self {
            name: name.into(),
            value,
            tail_bound,
            method: method.into(),
            params: BTreeMap::new(),
        }
    }

    fn param(mut self, key: &str, v: f64) -> Self {
        self.params.insert(key.into(), v);
        self
    }

    fn exact(name: impl Into<String>, value: f64) -> Self {
        Self::new(name, value, 0.0, "exact")
    }
}

/// Target precision per constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Precisions {
    pub gamma: f64,
    pub meissel_mertens: f64,
    pub mertens_e: f64,
    pub c_q: f64,
    pub saffari: f64,
}

impl Default for Precisions {
    fn default() -> Self {
        Self {
            gamma: 1e-12,
            meissel_mertens: 1e-8,
            mertens_e: 1e-7,
            c_q: 1e-8,
            saffari: 1e-8,
        }
    }
}

fn check_floor(constant: &str, requested: f64, floor: f64) -> Result<()> {
    if !(requested > 0.0) || !requested.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "{constant}: precision must be positive, got {requested}"
        )));
    }
    if requested < floor {
        return Err(Error::Precision {
            constant: constant.into(),
            requested,
            achievable: floor,
        });
    }
    Ok(())
}

fn check_cutoff(constant: &str, requested: f64, p: u64, config: &SieveConfig, tail: impl Fn(u64) -> f64) -> Result<()> {
    if p > config.max_bound {
        return Err(Error::Precision {
            constant: constant.into(),
            requested,
            achievable: tail(config.max_bound),
        });
    }
    Ok(())
}

/// `Σ_{p≤limit} term(p)`, streamed through the segmented sieve.
pub fn prime_series(limit: u64, config: &SieveConfig, term: impl Fn(u64) -> f64) -> Result<NeumaierSum> {
    let mut s = NeumaierSum::new();
    if limit >= 2 {
        for p in stream_segmented(2, limit, config.segment_size, config)? {
            s.add(term(p));
        }
    }
    Ok(s)
}

/// γ with `N` terms of the harmonic series.
pub fn euler_gamma_at(n: u64) -> ConstantValue {
    let h: NeumaierSum = (1..=n).map(|k| 1.0 / k as f64).collect();
    let nf = n as f64;
    let log_n = nf.ln();
    let correction = -1.0 / (2.0 * nf) + 1.0 / (12.0 * nf * nf) - 1.0 / (120.0 * nf.powi(4));
    let value = h.value() - log_n + correction;
    let remainder = 1.0 / (252.0 * nf.powi(6));
    let rounding = h.error_bound() + 4.0 * UNIT_ROUNDOFF * (h.value() + log_n);
    ConstantValue::new("gamma", value, remainder + rounding, "euler-maclaurin").param("N", nf)
}

pub fn euler_gamma(target: f64) -> Result<ConstantValue> {
    check_floor("gamma", target, GAMMA_MIN_PRECISION)?;
    // Leave headroom for rounding in the harmonic sum.
    let n = ((1.0 / (252.0 * 0.5 * target)).powf(1.0 / 6.0)).ceil().max(10.0) as u64;
    Ok(euler_gamma_at(n))
}

/// M with primes up to `p_max` and γ at `gamma`.
pub fn meissel_mertens_at(p_max: u64, gamma: &ConstantValue, config: &SieveConfig) -> Result<ConstantValue> {
    let s = prime_series(p_max, config, |p| {
        let x = 1.0 / p as f64;
        (-x).ln_1p() + x
    })?;
    let tail = 1.0 / (2.0 * p_max as f64);
    Ok(ConstantValue::new(
        "meissel_mertens",
        gamma.value + s.value(),
        tail + s.error_bound() + gamma.tail_bound,
        "gamma-shifted-prime-sum",
    )
    .param("P", p_max as f64)
    .param("gamma_N", gamma.params["N"]))
}

pub fn meissel_mertens(target: f64, config: &SieveConfig) -> Result<ConstantValue> {
    check_floor("meissel_mertens", target, MERTENS_M_MIN_PRECISION)?;
    let gamma = euler_gamma((target / 100.0).max(GAMMA_MIN_PRECISION))?;
    let budget = 0.9 * target - gamma.tail_bound;
    let p = (1.0 / (2.0 * budget)).ceil() as u64;
    check_cutoff("meissel_mertens", target, p, config, |b| 1.0 / (2.0 * b as f64))?;
    meissel_mertens_at(p, &gamma, config)
}

fn e_tail(p: u64) -> f64 {
    let pf = p as f64;
    ((pf + 1.0).ln() + 1.0) / pf
}

/// Smallest `P` (up to rounding) with `(log(P+1) + 1)/P ≤ budget`.
fn e_cutoff(budget: f64) -> u64 {
    let mut p = 1.0 / budget;
    for _ in 0..50 {
        let next = ((p + 1.0).ln() + 1.0) / budget;
        if (next - p).abs() < 1.0 {
            p = next;
            break;
        }
        p = next;
    }
    let mut p = p.ceil() as u64;
    while e_tail(p) > budget {
        p += 1;
    }
    p
}

/// `Σ_{p≤P} log p / (p(p−1))`, the prime-power part of Mertens' `E`.
fn log_prime_power_sum(p_max: u64, config: &SieveConfig) -> Result<NeumaierSum> {
    prime_series(p_max, config, |p| {
        let pf = p as f64;
        pf.ln() / (pf * (pf - 1.0))
    })
}

pub fn mertens_e_at(p_max: u64, gamma: &ConstantValue, config: &SieveConfig) -> Result<ConstantValue> {
    let s = log_prime_power_sum(p_max, config)?;
    Ok(ConstantValue::new(
        "mertens_e",
        -gamma.value - s.value(),
        e_tail(p_max) + s.error_bound() + gamma.tail_bound,
        "gamma-shifted-prime-sum",
    )
    .param("P", p_max as f64)
    .param("gamma_N", gamma.params["N"]))
}

pub fn mertens_e(target: f64, config: &SieveConfig) -> Result<ConstantValue> {
    check_floor("mertens_e", target, MERTENS_E_MIN_PRECISION)?;
    let gamma = euler_gamma((target / 100.0).max(GAMMA_MIN_PRECISION))?;
    let p = e_cutoff(0.9 * target - gamma.tail_bound);
    check_cutoff("mertens_e", target, p, config, e_tail)?;
    mertens_e_at(p, &gamma, config)
}

fn c_q_tail(model: &PrimeModel, p: u64) -> f64 {
    2.0 * model.k_bound / model.alpha * (p as f64).powf(-model.delta) / model.delta
}

/// `C_Q` truncated at `p_max`. Requires `K/(α P^δ) ≤ 1/2` for the bound to apply.
pub fn c_q_at(model: &PrimeModel, p_max: u64, config: &SieveConfig) -> Result<ConstantValue> {
    let name = format!("c_q[{}]", model.name);
    if model.exact_leading_term() {
        return Ok(ConstantValue::exact(name, 0.0));
    }
    let s = prime_series(p_max, config, |p| model.log_deviation(p) / p as f64)?;
    Ok(
        ConstantValue::new(name, s.value(), c_q_tail(model, p_max) + s.error_bound(), "prime-sum")
            .param("P", p_max as f64)
            .param("delta", model.delta)
            .param("K", model.k_bound),
    )
}

pub fn c_q(model: &PrimeModel, target: f64, config: &SieveConfig) -> Result<ConstantValue> {
    check_floor("c_q", target, C_Q_MIN_PRECISION)?;
    if model.exact_leading_term() {
        return c_q_at(model, 2, config);
    }
    if !(model.delta > 0.0) {
        return Err(Error::InvalidModel(format!("{}: C_Q needs delta > 0", model.name)));
    }
    let k = model.k_bound / model.alpha;
    let for_target = (2.0 * k / (0.9 * target * model.delta)).powf(1.0 / model.delta);
    let for_log = (2.0 * k).powf(1.0 / model.delta);
    let p = for_target.max(for_log).max(2.0).ceil();
    if p > config.max_bound as f64 {
        return Err(Error::Precision {
            constant: format!("c_q[{}]", model.name),
            requested: target,
            achievable: c_q_tail(model, config.max_bound),
        });
    }
    c_q_at(model, p as u64, config)
}

/// `ρ_f = exp(C_Q)`.
pub fn rho_f(model: &PrimeModel, target: f64, config: &SieveConfig) -> Result<ConstantValue> {
    let c = c_q(model, target, config)?;
    Ok(exp_of(format!("rho_f[{}]", model.name), &c))
}

fn exp_of(name: String, c: &ConstantValue) -> ConstantValue {
    let value = c.value.exp();
    let mut out = ConstantValue::new(name, value, value * c.tail_bound.exp_m1(), &c.method);
    out.params = c.params.clone();
    out
}

/// `Σ_{p≤P} Σ_{a≥2} p^(−a) log(f(p^a)/f(p^(a−1)))`, the per-`n` contribution
/// of prime powers to `log G_f(n)`. Zero for strongly multiplicative models.
///
/// The tail uses `|log(f(p^a)/f(p^(a−1)))| ≤ (|d|+1) log p + log 2`, which
/// model validation checks on small prime powers.
pub fn prime_power_correction_at(model: &PrimeModel, p_max: u64, config: &SieveConfig) -> Result<ConstantValue> {
    let name = format!("prime_power_correction[{}]", model.name);
    if model.strongly_multiplicative {
        return Ok(ConstantValue::exact(name, 0.0));
    }
    const INNER_CUTOFF: f64 = 1e-22;
    let mut truncated = 0u64;
    let mut s = NeumaierSum::new();
    for p in stream_segmented(2, p_max, config.segment_size, config)? {
        let pf = p as f64;
        let maj = model.log_ratio_majorant(p);
        let mut w = 1.0 / (pf * pf);
        let mut a = 2;
        let mut inner = 0.0;
        while w * maj > INNER_CUTOFF {
            inner += w * model.log_ratio_prime_power(p, a);
            w /= pf;
            a += 1;
        }
        truncated += 1;
        s.add(inner);
    }
    let pf = p_max as f64;
    let tail = (model.d.abs() + 1.0) * e_tail(p_max) + LN_2 / pf;
    // Each inner geometric series stops once a term drops below the cutoff.
    let inner_err = 2.0 * INNER_CUTOFF * truncated as f64;
    Ok(ConstantValue::new(name, s.value(), tail + inner_err + s.error_bound(), "prime-sum").param("P", pf))
}

pub fn prime_power_correction(model: &PrimeModel, target: f64, config: &SieveConfig) -> Result<ConstantValue> {
    check_floor("prime_power_correction", target, MERTENS_E_MIN_PRECISION)?;
    if model.strongly_multiplicative {
        return prime_power_correction_at(model, 2, config);
    }
    let scale = model.d.abs() + 1.0 + LN_2;
    let p = e_cutoff(0.9 * target / scale);
    if p > config.max_bound {
        let b = config.max_bound;
        return Err(Error::Precision {
            constant: format!("prime_power_correction[{}]", model.name),
            requested: target,
            achievable: (model.d.abs() + 1.0) * e_tail(b) + LN_2 / b as f64,
        });
    }
    prime_power_correction_at(model, p, config)
}

/// Components of `η₀ = M log α + d(γ + E − 1) + C_Q`. Components that are
/// multiplied by an exact zero are not evaluated and show up as `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Eta0Parts {
    pub eta0: ConstantValue,
    pub gamma: Option<ConstantValue>,
    pub meissel_mertens: Option<ConstantValue>,
    pub mertens_e: Option<ConstantValue>,
    pub c_q: ConstantValue,
}

/// Split `target` evenly across the non-vanishing components of `η₀`.
pub fn eta0_parts(model: &PrimeModel, target: f64, config: &SieveConfig) -> Result<Eta0Parts> {
    if !(target > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eta0: precision must be positive, got {target}"
        )));
    }
    let log_alpha = model.alpha.ln();
    let d = model.d;
    let c_exact = model.exact_leading_term();
    let active = [log_alpha != 0.0, d != 0.0, !c_exact]
        .iter()
        .filter(|&&b| b)
        .count()
        .max(1);
    let share = target / active as f64;
    let sub = |what: &str, p: f64, floor: f64| -> Result<f64> {
        if p < floor {
            Err(Error::Precision {
                constant: format!("eta0[{}] via {what}", model.name),
                requested: target,
                achievable: floor * (target / p),
            })
        } else {
            Ok(p)
        }
    };

    let mut value = 0.0;
    let mut tail = 0.0;
    let mut params = BTreeMap::new();
    let m = if log_alpha != 0.0 {
        let prec = sub("meissel_mertens", share / log_alpha.abs(), MERTENS_M_MIN_PRECISION)?;
        let m = meissel_mertens(prec, config)?;
        value += m.value * log_alpha;
        tail += m.tail_bound * log_alpha.abs();
        params.insert("M_P".into(), m.params["P"]);
        Some(m)
    } else {
        None
    };
    let (g, e) = if d != 0.0 {
        // γ enters twice: directly, and inside E.
        let prec = sub("mertens_e", share / d.abs(), MERTENS_E_MIN_PRECISION)?;
        let e = mertens_e(prec, config)?;
        let g = euler_gamma((prec / 100.0).max(GAMMA_MIN_PRECISION))?;
        value += d * (g.value + e.value - 1.0);
        tail += d.abs() * (g.tail_bound + e.tail_bound);
        params.insert("E_P".into(), e.params["P"]);
        params.insert("gamma_N".into(), g.params["N"]);
        (Some(g), Some(e))
    } else {
        (None, None)
    };
    let c = if c_exact {
        c_q_at(model, 2, config)?
    } else {
        let prec = sub("c_q", share, C_Q_MIN_PRECISION)?;
        let c = c_q(model, prec, config)?;
        params.insert("C_Q_P".into(), c.params["P"]);
        c
    };
    value += c.value;
    tail += c.tail_bound;
    let mut eta0 = ConstantValue::new(format!("eta0[{}]", model.name), value, tail, "assembled");
    eta0.params = params;
    Ok(Eta0Parts {
        eta0,
        gamma: g,
        meissel_mertens: m,
        mertens_e: e,
        c_q: c,
    })
}

/// `η₀ = M log α + d(γ + E − 1) + C_Q`.
pub fn eta0(model: &PrimeModel, target: f64, config: &SieveConfig) -> Result<ConstantValue> {
    Ok(eta0_parts(model, target, config)?.eta0)
}

/// `α^M · e^(d(γ+E−1)) · ρ_f`, computed as `exp(η₀)`.
pub fn leading_constant(model: &PrimeModel, target: f64, config: &SieveConfig) -> Result<ConstantValue> {
    let e = eta0(model, target, config)?;
    let out = exp_of(format!("leading_constant[{}]", model.name), &e);
    debug_assert_eq!(out.value, e.value.exp());
    Ok(out)
}

/// `lim (log G_f(n) − d log n − log α · log log n)`, i.e. `η₀` plus the
/// prime-power correction. Equals `η₀` for strongly multiplicative models.
pub fn geomean_log_constant(model: &PrimeModel, target: f64, config: &SieveConfig) -> Result<ConstantValue> {
    let e = eta0(model, target / 2.0, config)?;
    let c = prime_power_correction(model, (target / 2.0).max(MERTENS_E_MIN_PRECISION), config)?;
    let mut out = ConstantValue::new(
        format!("geomean_log_constant[{}]", model.name),
        e.value + c.value,
        e.tail_bound + c.tail_bound,
        "assembled",
    );
    out.params = e.params;
    if let Some(&p) = c.params.get("P") {
        out.params.insert("correction_P".into(), p);
    }
    Ok(out)
}

// --- Saffari coefficients -------------------------------------------------

fn saffari_g(k: i32, t: f64) -> f64 {
    t.ln().powi(k) / (t * t)
}

fn saffari_g_prime(k: i32, t: f64) -> f64 {
    let l = t.ln();
    if k == 0 {
        -2.0 / (t * t * t)
    } else {
        l.powi(k - 1) * (k as f64 - 2.0 * l) / (t * t * t)
    }
}

/// `∫_T^∞ (log t)^k t^(−2) dt = (1/T) Σ_{i≤k} k!/i! (log T)^i`.
fn saffari_tail_integral(k: i32, t: f64) -> f64 {
    let l = t.ln();
    let mut coef = 1.0;
    let mut total = 0.0;
    for i in (0..=k).rev() {
        total += coef * l.powi(i);
        coef *= i as f64;
    }
    total / t
}

/// Past this `log t`, `(log t)^k / t²` has a sign-definite second derivative.
fn saffari_convex_from(k: i32) -> f64 {
    let kf = k as f64;
    (5.0 * kf + (kf * kf + 24.0 * kf).sqrt()) / 12.0
}

/// `a_j` with the integral split at every integer below `T`.
///
/// On `[m, m+1]` the integrand `(t−m)(log t)^(j−1)/t²` is smooth, so a
/// 16-point Gauss–Legendre rule is used and compared with an 8-point rule
/// for the error estimate. Past `T`,
/// `∫_T^∞ {t} g = ∫_T^∞ g / 2 − g(T)/12 + R` with `|R| ≤ (√3/216)|g'(T)|`
/// once `g''` keeps one sign on `[T, ∞)`.
pub fn saffari_a_at(j: u32, t_cut: u64) -> Result<ConstantValue> {
    if !(1..=SAFFARI_MAX_J).contains(&j) {
        return Err(Error::InvalidArgument(format!(
            "a_j needs 1 <= j <= {SAFFARI_MAX_J}, got {j}"
        )));
    }
    let k = j as i32 - 1;
    let tf = t_cut as f64;
    if t_cut < 2 || tf.ln() <= saffari_convex_from(k) {
        return Err(Error::InvalidArgument(format!("a_{j}: cut {t_cut} too small")));
    }
    let fine = GaussLegendre::new(NonZeroUsize::new(16).expect("nonzero"));
    let coarse = GaussLegendre::new(NonZeroUsize::new(8).expect("nonzero"));
    let mut body = NeumaierSum::new();
    let mut quad_err = 0.0;
    for m in 1..t_cut {
        let mf = m as f64;
        let f = |t: f64| (t - mf) * saffari_g(k, t);
        let hi = fine.integrate(mf, mf + 1.0, f);
        let lo = coarse.integrate(mf, mf + 1.0, f);
        body.add(hi);
        quad_err += (hi - lo).abs();
    }
    let tail = 0.5 * saffari_tail_integral(k, tf) - saffari_g(k, tf) / 12.0;
    let tail_err = 3f64.sqrt() / 216.0 * saffari_g_prime(k, tf).abs();
    let value = -(body.value() + tail);
    let bound = quad_err + tail_err + body.error_bound() + 4.0 * UNIT_ROUNDOFF * tail.abs();
    Ok(ConstantValue::new(format!("a_{j}"), value, bound, "gauss-legendre")
        .param("j", j as f64)
        .param("T", tf)
        .param("nodes", 16.0))
}

pub fn saffari_a(j: u32, target: f64) -> Result<ConstantValue> {
    if !(1..=SAFFARI_MAX_J).contains(&j) {
        return Err(Error::InvalidArgument(format!(
            "a_j needs 1 <= j <= {SAFFARI_MAX_J}, got {j}"
        )));
    }
    check_floor(&format!("a_{j}"), target, SAFFARI_MIN_PRECISION)?;
    let k = j as i32 - 1;
    let min_log = saffari_convex_from(k) + 0.5;
    let mut t: u64 = 128;
    while (t as f64).ln() < min_log || 3f64.sqrt() / 216.0 * saffari_g_prime(k, t as f64).abs() > target / 4.0 {
        t *= 2;
        if t > 1 << 30 {
            return Err(Error::Precision {
                constant: format!("a_{j}"),
                requested: target,
                achievable: 3f64.sqrt() / 216.0 * saffari_g_prime(k, t as f64).abs(),
            });
        }
    }
    let a = saffari_a_at(j, t)?;
    if a.tail_bound > target {
        return Err(Error::Precision {
            constant: format!("a_{j}"),
            requested: target,
            achievable: a.tail_bound,
        });
    }
    Ok(a)
}

// --- limit definitions ----------------------------------------------------

/// Value of a constant read off its limit definition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitEstimate {
    pub name: String,
    pub x_max: u64,
    /// The bare limit expression at `x_max`.
    pub raw: f64,
    /// Corrected expression averaged over log-spaced `x ∈ [x_max/10, x_max]`.
    pub extrapolated: f64,
    /// Max minus min of the corrected expression over those points.
    pub spread: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitEstimates {
    pub mertens_e: LimitEstimate,
    pub meissel_mertens: LimitEstimate,
}

/// Limit-definition estimates of `E` and `M` from primes up to `x_max`.
///
/// At each sample point `x` the bare expressions are corrected by the
/// explicit first-order terms of the prime-number-theorem error:
///
/// ```text
/// E(x) = Σ_{p≤x} log p/p − log x − (θ(x) − x)/x − c_E(x)
/// M(x) = Σ_{p≤x} 1/p − log log x − (θ(x) − x)/(x log x) − c_M(x)
/// c_E(x) = Σ_p Σ_{k≥2} log p / max(x, p^k)
/// c_M(x) = Σ_p Σ_{k≥2} log p / (m log m),  m = max(x, p^k)
/// ```
///
/// The residual oscillates with `ψ(x) − x`; averaging over a decade of `x`
/// damps it. Primes beyond `x_max` enter `c_E`, `c_M` through the
/// estimates `1/x_max` and `1/(2 x_max log x_max)`.
pub fn limit_estimates(x_max: u64, points: usize, config: &SieveConfig) -> Result<LimitEstimates> {
    if x_max < 1000 || points < 2 {
        return Err(Error::InvalidArgument(
            "limit estimate needs x_max >= 1000 and >= 2 points".into(),
        ));
    }
    config.check(x_max)?;
    let lo = (x_max / 10) as f64;
    let xs: Vec<u64> = (0..points)
        .map(|i| {
            let t = i as f64 / (points - 1) as f64;
            if i == points - 1 {
                x_max
            } else {
                (lo.ln() * (1.0 - t) + (x_max as f64).ln() * t).exp().round() as u64
            }
        })
        .collect();

    #[derive(Clone, Copy, Default)]
    struct Snap {
        inv: f64,
        theta: f64,
        mlog: f64,
    }
    let mut inv = NeumaierSum::new();
    let mut theta = NeumaierSum::new();
    let mut mlog = NeumaierSum::new();
    let mut te = NeumaierSum::new();
    let mut tm = NeumaierSum::new();
    let mut snaps = vec![Snap::default(); xs.len()];
    let mut next = 0;
    for p in stream_segmented(2, x_max, config.segment_size, config)? {
        while next < xs.len() && xs[next] < p {
            snaps[next] = Snap {
                inv: inv.value(),
                theta: theta.value(),
                mlog: mlog.value(),
            };
            next += 1;
        }
        let pf = p as f64;
        let lp = pf.ln();
        inv.add(1.0 / pf);
        theta.add(lp);
        mlog.add(lp / pf);
        te.add(lp / (pf * (pf - 1.0)));
        tm.add(-(-1.0 / pf).ln_1p() - 1.0 / pf);
    }
    for s in snaps.iter_mut().skip(next) {
        *s = Snap {
            inv: inv.value(),
            theta: theta.value(),
            mlog: mlog.value(),
        };
    }

    let xm = x_max as f64;
    let te_total = te.value() + 1.0 / xm;
    let tm_total = tm.value() + 1.0 / (2.0 * xm * xm.ln());
    let small = primes_up_to(isqrt(x_max));
    let mut e_vals = Vec::with_capacity(xs.len());
    let mut m_vals = Vec::with_capacity(xs.len());
    for (&x, s) in xs.iter().zip(&snaps) {
        let xf = x as f64;
        let lx = xf.ln();
        let mut c_e = te_total;
        let mut c_m = tm_total;
        for &p in small.iter().take_while(|&&p| p * p <= x) {
            let pf = p as f64;
            let lp = pf.ln();
            c_e -= lp / (pf * (pf - 1.0));
            c_m -= -(-1.0 / pf).ln_1p() - 1.0 / pf;
            let mut pk = p * p;
            let mut k = 2u32;
            while pk <= x {
                c_e += lp / xf;
                c_m += lp / (xf * lx);
                k += 1;
                pk = match pk.checked_mul(p) {
                    Some(v) => v,
                    None => break,
                };
            }
            // k is now the first exponent with p^k > x.
            let mut w = pf.powi(-(k as i32));
            c_e += lp * w / (1.0 - 1.0 / pf);
            let mut kk = k;
            while w > 1e-30 {
                c_m += w / kk as f64;
                w /= pf;
                kk += 1;
            }
        }
        let dev = (s.theta - xf) / xf;
        e_vals.push(s.mlog - lx - dev - c_e);
        m_vals.push(s.inv - lx.ln() - dev / lx - c_m);
    }

    let summarize = |name: &str, vals: &[f64], raw: f64| {
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        LimitEstimate {
            name: name.into(),
            x_max,
            raw,
            extrapolated: mean,
            spread: max - min,
            points: vals.len(),
        }
    };
    let last = snaps.last().expect("points >= 2");
    Ok(LimitEstimates {
        mertens_e: summarize("mertens_e", &e_vals, last.mlog - xm.ln()),
        meissel_mertens: summarize("meissel_mertens", &m_vals, last.inv - xm.ln().ln()),
    })
}
