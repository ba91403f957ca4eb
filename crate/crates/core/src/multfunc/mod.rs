//! Positive multiplicative functions described by their values on prime
//! powers, together with the growth profile `f(p) = α·p^d + O(p^(d−δ))`.
//!
//! Values are carried in log space. Built-in models evaluate `log f(p^a)`
//! in closed form (using `ln_1p` where a small correction sits on top of a
//! power of `p`), so nothing overflows even for Jordan totients at large
//! exponents.

pub mod expr;

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::accum::NeumaierSum;
use crate::error::{Error, Result};
use crate::sieve::{primes_up_to, SpfTable};
use expr::Expr;

/// Primes checked by the profile test at model load.
const LOAD_PROFILE_PMAX: u64 = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    Kappa,
    TwoOmega,
    EulerPhi,
    Sigma,
    DivisorD,
    Jordan(u32),
    Custom { f_p: Expr, f_pa: Option<Expr> },
}

/// A positive multiplicative function and its asymptotic profile at primes.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimeModel {
    pub name: String,
    /// Growth exponent.
    pub d: f64,
    /// Leading coefficient, > 0.
    pub alpha: f64,
    /// Error exponent, > 0; `f64::INFINITY` when `f(p) = α·p^d` exactly.
    pub delta: f64,
    /// Constant in `|f(p) − α p^d| ≤ K p^(d−δ)`.
    pub k_bound: f64,
    pub strongly_multiplicative: bool,
    pub kind: ModelKind,
}

/// `f(k)` together with its natural log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FunctionValue {
    pub value: f64,
    pub log_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileCheck {
    pub k_hat: f64,
    pub pass: bool,
}

fn exact_pow(p: u64, e: u64) -> Option<u64> {
    let e = u32::try_from(e).ok()?;
    p.checked_pow(e)
}

/// Largest integer represented exactly by f64.
const F64_EXACT: u64 = 1 << 53;

fn exact_f64(v: Option<u64>) -> Option<f64> {
    v.filter(|&x| x <= F64_EXACT).map(|x| x as f64)
}

impl PrimeModel {
    pub fn kappa() -> Self {
        Self {
            name: "kappa".into(),
            d: 1.0,
            alpha: 1.0,
            delta: f64::INFINITY,
            k_bound: 0.0,
            strongly_multiplicative: true,
            kind: ModelKind::Kappa,
        }
    }

    pub fn two_omega() -> Self {
        Self {
            name: "two_omega".into(),
            d: 0.0,
            alpha: 2.0,
            delta: f64::INFINITY,
            k_bound: 0.0,
            strongly_multiplicative: true,
            kind: ModelKind::TwoOmega,
        }
    }

    pub fn euler_phi() -> Self {
        Self {
            name: "euler_phi".into(),
            d: 1.0,
            alpha: 1.0,
            delta: 1.0,
            k_bound: 1.0,
            strongly_multiplicative: false,
            kind: ModelKind::EulerPhi,
        }
    }

    pub fn sigma() -> Self {
        Self {
            name: "sigma".into(),
            d: 1.0,
            alpha: 1.0,
            delta: 1.0,
            k_bound: 1.0,
            strongly_multiplicative: false,
            kind: ModelKind::Sigma,
        }
    }

    pub fn divisor_d() -> Self {
        Self {
            name: "divisor_d".into(),
            d: 0.0,
            alpha: 2.0,
            delta: f64::INFINITY,
            k_bound: 0.0,
            strongly_multiplicative: false,
            kind: ModelKind::DivisorD,
        }
    }

    pub fn jordan(k: u32) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidModel("jordan_k needs k >= 1".into()));
        }
        Ok(Self {
            name: format!("jordan_{k}"),
            d: k as f64,
            alpha: 1.0,
            delta: k as f64,
            k_bound: 1.0,
            strongly_multiplicative: false,
            kind: ModelKind::Jordan(k),
        })
    }

    /// True when `f(p) = α p^d` at every prime, so the `S3` part vanishes.
    pub fn exact_leading_term(&self) -> bool {
        matches!(self.kind, ModelKind::Kappa | ModelKind::TwoOmega | ModelKind::DivisorD)
            || (matches!(self.kind, ModelKind::Custom { .. }) && self.delta.is_infinite())
    }

    /// `log f(p^a)` for `a ≥ 1`.
    pub fn log_at_prime_power(&self, p: u64, a: u32) -> f64 {
        debug_assert!(a >= 1);
        let lp = (p as f64).ln();
        let af = a as f64;
        match &self.kind {
            ModelKind::Kappa => lp,
            ModelKind::TwoOmega => std::f64::consts::LN_2,
            ModelKind::EulerPhi => (af - 1.0) * lp + ((p - 1) as f64).ln(),
            ModelKind::Sigma => {
                if a == 1 {
                    ((p + 1) as f64).ln()
                } else {
                    let pf = p as f64;
                    af * lp + (-pf.powf(-(af + 1.0))).ln_1p() - (-1.0 / pf).ln_1p()
                }
            }
            ModelKind::DivisorD => (af + 1.0).ln(),
            ModelKind::Jordan(k) => {
                let exact = exact_f64(exact_pow(p, *k as u64).map(|x| x - 1));
                let k = *k as f64;
                match exact {
                    Some(v) => (af - 1.0) * k * lp + v.ln(),
                    None => af * k * lp + (-(p as f64).powf(-k)).ln_1p(),
                }
            }
            ModelKind::Custom { f_p, f_pa } => match (a, f_pa) {
                (1, _) | (_, None) => f_p.eval(p as f64, 1.0).ln(),
                (_, Some(e)) => e.eval(p as f64, af).ln(),
            },
        }
    }

    pub fn log_at_prime(&self, p: u64) -> f64 {
        self.log_at_prime_power(p, 1)
    }

    /// `f(p^a)`, exact when the integer value fits in 53 bits.
    pub fn value_at_prime_power(&self, p: u64, a: u32) -> f64 {
        let exact = match &self.kind {
            ModelKind::Kappa => Some(p as f64),
            ModelKind::TwoOmega => Some(2.0),
            ModelKind::EulerPhi => exact_f64(exact_pow(p, a as u64 - 1).and_then(|x| x.checked_mul(p - 1))),
            ModelKind::Sigma => exact_f64(exact_pow(p, a as u64 + 1).map(|x| (x - 1) / (p - 1))),
            ModelKind::DivisorD => Some(a as f64 + 1.0),
            ModelKind::Jordan(k) => {
                let k = *k as u64;
                exact_f64(
                    exact_pow(p, k * (a as u64 - 1))
                        .zip(exact_pow(p, k))
                        .and_then(|(x, y)| x.checked_mul(y - 1)),
                )
            }
            ModelKind::Custom { f_p, f_pa } => {
                let v = match (a, f_pa) {
                    (1, _) | (_, None) => f_p.eval(p as f64, 1.0),
                    (_, Some(e)) => e.eval(p as f64, a as f64),
                };
                v.is_finite().then_some(v)
            }
        };
        exact.unwrap_or_else(|| self.log_at_prime_power(p, a).exp())
    }

    pub fn value_at_prime(&self, p: u64) -> f64 {
        self.value_at_prime_power(p, 1)
    }

    /// `𝓔(p) = f(p) − α p^d`.
    pub fn error_term(&self, p: u64) -> f64 {
        match &self.kind {
            ModelKind::Kappa | ModelKind::TwoOmega | ModelKind::DivisorD => 0.0,
            ModelKind::EulerPhi | ModelKind::Jordan(_) => -1.0,
            ModelKind::Sigma => 1.0,
            ModelKind::Custom { f_p, .. } => f_p.eval(p as f64, 1.0) - self.alpha * (p as f64).powf(self.d),
        }
    }

    /// `log(f(p) / (α p^d))`, the summand of `S3` and `C_Q`.
    pub fn log_deviation(&self, p: u64) -> f64 {
        let pf = p as f64;
        match &self.kind {
            ModelKind::Kappa | ModelKind::TwoOmega | ModelKind::DivisorD => 0.0,
            ModelKind::EulerPhi => (-1.0 / pf).ln_1p(),
            ModelKind::Sigma => (1.0 / pf).ln_1p(),
            ModelKind::Jordan(k) => (-pf.powi(-(*k as i32))).ln_1p(),
            ModelKind::Custom { .. } => {
                if self.delta.is_infinite() {
                    0.0
                } else {
                    let lead = self.alpha * pf.powf(self.d);
                    (self.error_term(p) / lead).ln_1p()
                }
            }
        }
    }

    /// `log f(p^a) − log f(p^(a−1))` for `a ≥ 2`; exactly zero for strongly
    /// multiplicative models.
    pub fn log_ratio_prime_power(&self, p: u64, a: u32) -> f64 {
        assert!(a >= 2, "log_ratio_prime_power needs a >= 2");
        if self.strongly_multiplicative {
            return 0.0;
        }
        let lp = (p as f64).ln();
        match &self.kind {
            ModelKind::EulerPhi => lp,
            ModelKind::Jordan(k) => *k as f64 * lp,
            ModelKind::DivisorD => (a as f64 + 1.0).ln() - (a as f64).ln(),
            _ => self.log_at_prime_power(p, a) - self.log_at_prime_power(p, a - 1),
        }
    }

    /// Stable textual identity, used to key cache files.
    pub fn fingerprint(&self) -> String {
        let mut s = format!(
            "{}|d={:e}|alpha={:e}|delta={:e}|K={:e}|strong={}",
            self.name, self.d, self.alpha, self.delta, self.k_bound, self.strongly_multiplicative
        );
        if let ModelKind::Custom { f_p, f_pa } = &self.kind {
            let _ = write!(s, "|f_p={f_p}");
            if let Some(e) = f_pa {
                let _ = write!(s, "|f_pa={e}");
            }
        }
        s
    }

    /// Bound `|log f(p^a)/f(p^(a−1))| ≤ (|d| + 1)·log p + log 2` assumed when
    /// bounding tails of the prime-power correction.
    pub fn log_ratio_majorant(&self, p: u64) -> f64 {
        (self.d.abs() + 1.0) * (p as f64).ln() + std::f64::consts::LN_2
    }
}

/// Look up a built-in model: `kappa`, `two_omega`, `euler_phi`, `sigma`,
/// `divisor_d`, `jordan_<k>` or `jordan_k(<k>)`.
pub fn builtin(name: &str) -> Result<PrimeModel> {
    let name = name.trim();
    match name {
        "kappa" => return Ok(PrimeModel::kappa()),
        "two_omega" => return Ok(PrimeModel::two_omega()),
        "euler_phi" => return Ok(PrimeModel::euler_phi()),
        "sigma" => return Ok(PrimeModel::sigma()),
        "divisor_d" => return Ok(PrimeModel::divisor_d()),
        _ => {}
    }
    let k = name
        .strip_prefix("jordan_k(")
        .and_then(|r| r.strip_suffix(')'))
        .or_else(|| name.strip_prefix("jordan_"));
    match k {
        Some(k) => {
            let k: i64 = k.parse().map_err(|_| Error::UnknownModel(name.to_string()))?;
            if !(1..=64).contains(&k) {
                return Err(Error::InvalidModel(format!("jordan_k needs 1 <= k <= 64, got {k}")));
            }
            PrimeModel::jordan(k as u32)
        }
        None => Err(Error::UnknownModel(name.to_string())),
    }
}

pub const BUILTIN_NAMES: [&str; 6] = ["kappa", "two_omega", "euler_phi", "sigma", "divisor_d", "jordan_2"];

/// `f(k)` by multiplicativity over the factorization from `table`.
pub fn value_at(model: &PrimeModel, k: u64, table: &SpfTable) -> FunctionValue {
    assert!(k >= 1, "value_at needs k >= 1");
    if k == 1 {
        return FunctionValue {
            value: 1.0,
            log_value: 0.0,
        };
    }
    let mut log = NeumaierSum::new();
    let mut value = 1.0f64;
    for (p, a) in table.factorize(k) {
        log.add(model.log_at_prime_power(p, a));
        value *= model.value_at_prime_power(p, a);
    }
    let log_value = log.value();
    if !value.is_finite() {
        value = log_value.exp();
    }
    FunctionValue { value, log_value }
}

/// Free-function form of [`PrimeModel::log_ratio_prime_power`].
pub fn log_ratio_prime_power(model: &PrimeModel, p: u64, a: u32) -> f64 {
    model.log_ratio_prime_power(p, a)
}

/// `K̂ = max_{p ≤ p_max} |f(p) − α p^d| · p^(δ−d)`, passing iff `K̂ ≤ K`.
pub fn error_profile_check(model: &PrimeModel, p_max: u64) -> ProfileCheck {
    let mut k_hat = 0.0f64;
    for p in primes_up_to(p_max.max(2)) {
        let e = model.error_term(p).abs();
        if e == 0.0 {
            continue;
        }
        let scaled = if model.delta.is_infinite() {
            f64::INFINITY
        } else {
            let shift = model.delta - model.d;
            if shift == 0.0 {
                e
            } else {
                e * (shift * (p as f64).ln()).exp()
            }
        };
        k_hat = k_hat.max(scaled);
    }
    ProfileCheck {
        k_hat,
        pass: k_hat <= model.k_bound,
    }
}

/// Parse a custom model description. See `docs/model-format.md`.
pub fn parse_model(src: &str) -> Result<PrimeModel> {
    let mut name = None;
    let mut d = None;
    let mut alpha = None;
    let mut delta = None;
    let mut k_bound = None;
    let mut f_p = None;
    let mut f_pa = None;
    for (i, raw) in src.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let syntax = |msg: String| Error::ModelSyntax { line: line_no, msg };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| syntax("expected `key = value`".into()))?;
        let (key, value) = (key.trim(), value.trim());
        let real = |v: &str| -> Result<f64> {
            match v {
                "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
                _ => v
                    .parse::<f64>()
                    .map_err(|_| syntax(format!("`{key}` expects a number, got `{v}`"))),
            }
        };
        match key {
            "name" => {
                if value.is_empty() || !value.chars().all(|c| c.is_alphanumeric() || c == '_') {
                    return Err(syntax(format!("bad model name `{value}`")));
                }
                name = Some(value.to_string());
            }
            "d" => d = Some(real(value)?),
            "alpha" => alpha = Some(real(value)?),
            "delta" => delta = Some(real(value)?),
            "K" => k_bound = Some(real(value)?),
            "f_p" => f_p = Some(expr::parse(value).map_err(syntax)?),
            "f_pa" => f_pa = Some(expr::parse(value).map_err(syntax)?),
            other => return Err(syntax(format!("unknown key `{other}`"))),
        }
    }
    let missing = |k: &str| Error::InvalidModel(format!("missing field `{k}`"));
    let f_p = f_p.ok_or_else(|| missing("f_p"))?;
    if f_p.uses_a() {
        return Err(Error::InvalidModel("f_p may not mention `a`".into()));
    }
    let model = PrimeModel {
        name: name.ok_or_else(|| missing("name"))?,
        d: d.ok_or_else(|| missing("d"))?,
        alpha: alpha.ok_or_else(|| missing("alpha"))?,
        delta: delta.ok_or_else(|| missing("delta"))?,
        k_bound: k_bound.ok_or_else(|| missing("K"))?,
        strongly_multiplicative: f_pa.is_none(),
        kind: ModelKind::Custom { f_p, f_pa },
    };
    validate(&model)?;
    Ok(model)
}

pub fn load_model(path: &Path) -> Result<PrimeModel> {
    parse_model(&std::fs::read_to_string(path)?)
}

/// Checks the hypotheses the expansions rely on: positivity, finite profile
/// parameters, consistency of `f(p)` and `f(p^1)`, and the error profile on
/// small primes.
pub fn validate(model: &PrimeModel) -> Result<()> {
    let bad = |m: String| Err(Error::InvalidModel(format!("{}: {m}", model.name)));
    if !model.d.is_finite() {
        return bad("d must be finite".into());
    }
    if !(model.alpha > 0.0 && model.alpha.is_finite()) {
        return bad("alpha must be positive".into());
    }
    if !(model.delta > 0.0) {
        return bad("delta must be positive".into());
    }
    if !(model.k_bound >= 0.0 && model.k_bound.is_finite()) {
        return bad("K must be finite and non-negative".into());
    }
    let primes = primes_up_to(LOAD_PROFILE_PMAX);
    for &p in &primes {
        let v = model.value_at_prime(p);
        if !(v > 0.0 && v.is_finite()) {
            return bad(format!("f({p}) = {v} is not positive"));
        }
    }
    for &p in primes.iter().take_while(|&&p| p <= 100) {
        if let ModelKind::Custom { f_pa: Some(e), .. } = &model.kind {
            let direct = e.eval(p as f64, 1.0);
            let v = model.value_at_prime(p);
            if (direct - v).abs() > 1e-12 * v.abs() {
                return bad(format!("f_pa(p, 1) = {direct} disagrees with f_p = {v} at p = {p}"));
            }
        }
        for a in 2..=12 {
            let l = model.log_at_prime_power(p, a);
            if !l.is_finite() {
                return bad(format!("f({p}^{a}) is not positive"));
            }
            if !model.strongly_multiplicative {
                let r = model.log_ratio_prime_power(p, a);
                if r.abs() > model.log_ratio_majorant(p) {
                    return bad(format!(
                        "log f({p}^{a})/f({p}^{}) = {r} exceeds (|d|+1)·log p + log 2",
                        a - 1
                    ));
                }
            }
        }
    }
    let check = error_profile_check(model, LOAD_PROFILE_PMAX);
    if !check.pass {
        return bad(format!(
            "error profile fails: K_hat = {} > K = {} on p <= {LOAD_PROFILE_PMAX}",
            check.k_hat, model.k_bound
        ));
    }
    Ok(())
}
