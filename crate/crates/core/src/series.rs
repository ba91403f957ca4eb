//! Truncated expansions in `x = 1/log n`.

use nalgebra::{DMatrix, DVector};
use num_traits::{FromPrimitive, Num};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::multfunc::PrimeModel;

pub const MAX_ORDER: usize = 12;
pub const MAX_CONDITION: f64 = 1e12;

fn check_order(r: usize) -> Result<()> {
    if r > MAX_ORDER {
        return Err(Error::InvalidArgument(format!("order {r} exceeds {MAX_ORDER}")));
    }
    Ok(())
}

/// `(i−1)!` for `i = 1..=r`: `li t ≈ Σ (i−1)! t / log^i t`.
pub fn li_coeffs(r: usize) -> Result<Vec<u64>> {
    lj_coeffs(1, r)
}

/// `(i−1)!/(j−1)!` for `i = j..=r`: coefficients of `t/log^i t` in `L_j(t)`.
pub fn lj_coeffs(j: usize, r: usize) -> Result<Vec<u64>> {
    if j < 1 || j > r {
        return Err(Error::InvalidArgument(format!("need 1 <= j <= r, got j={j}, r={r}")));
    }
    check_order(r)?;
    let mut out = Vec::with_capacity(r - j + 1);
    let mut c = 1u64;
    for i in j..=r {
        out.push(c);
        c *= i as u64;
    }
    Ok(out)
}

/// Checks `L_j = L_(j−1)/(j−1) − t/((j−1) log^(j−1) t)` coefficient by
/// coefficient, in integers after multiplying through by `j−1`.
pub fn lj_recurrence_check(j: usize, r: usize) -> Result<bool> {
    if j < 2 || j > r {
        return Err(Error::InvalidArgument(format!("need 2 <= j <= r, got j={j}, r={r}")));
    }
    let cur = lj_coeffs(j, r)?;
    let prev = lj_coeffs(j - 1, r)?;
    let scale = (j - 1) as u64;
    // i = j−1: only L_(j−1) and the subtracted monomial contribute.
    if prev[0] != 1 {
        return Ok(false);
    }
    Ok(cur.iter().zip(&prev[1..]).all(|(&c, &p)| scale * c == p))
}

/// Coefficients `g_0..g_r` of `exp(Σ_{j=1}^r e_j x^j)`, via
/// `g_0 = 1`, `k g_k = Σ_{j=1}^k j e_j g_(k−j)`.
pub fn series_exp<T>(e: &[T]) -> Result<Vec<T>>
where
    T: Num + Clone + FromPrimitive,
{
    let r = e.len();
    check_order(r)?;
    let mut g: Vec<T> = Vec::with_capacity(r + 1);
    g.push(T::one());
    for k in 1..=r {
        let mut acc = T::zero();
        for j in 1..=k {
            let jj = T::from_usize(j).expect("small integer");
            acc = acc + jj * e[j - 1].clone() * g[k - j].clone();
        }
        g.push(acc / T::from_usize(k).expect("small integer"));
    }
    Ok(g)
}

/// From `U(n)`'s coefficients `d_1..d_(r+1)` to `c_1..c_r` in
/// `S2(n)/n = log n + c_0 + Σ c_i / log^i n`:
/// `c_i = d_(i+1) − Σ_{j=1}^{i} d_j (i−1)!/(j−1)!`.
pub fn s2_coeffs_from_d<T>(d: &[T]) -> Result<Vec<T>>
where
    T: Num + Clone + FromPrimitive,
{
    if d.len() < 2 {
        return Err(Error::InvalidArgument("need at least d_1 and d_2".into()));
    }
    let r = d.len() - 1;
    check_order(r)?;
    let mut out = Vec::with_capacity(r);
    for i in 1..=r {
        let mut c = d[i].clone();
        for j in 1..=i {
            let ratio: u64 = (j..i).map(|m| m as u64).product();
            c = c - d[j - 1].clone() * T::from_u64(ratio).expect("small integer");
        }
        out.push(c);
    }
    Ok(out)
}

/// `t_logn·log n + t_loglogn·log log n + Σ_j e_j / log^j n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Expansion {
    pub t_logn: f64,
    pub t_loglogn: f64,
    pub e: Vec<f64>,
}

impl Expansion {
    pub fn new(t_logn: f64, t_loglogn: f64, e: Vec<f64>) -> Result<Self> {
        if e.is_empty() {
            return Err(Error::InvalidArgument("expansion needs e_0".into()));
        }
        check_order(e.len() - 1)?;
        Ok(Self { t_logn, t_loglogn, e })
    }

    /// `1 + Σ c_j / log^j n`, the correction factor of the product formula.
    pub fn correction(c: &[f64]) -> Result<Self> {
        let mut e = vec![1.0];
        e.extend_from_slice(c);
        Self::new(0.0, 0.0, e)
    }

    pub fn order(&self) -> usize {
        self.e.len() - 1
    }

    fn poly(&self, x: f64) -> f64 {
        self.e.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn evaluate(&self, n: f64) -> Result<f64> {
        if n < 3.0 {
            return Err(Error::InvalidArgument(format!("expansion needs n >= 3, got {n}")));
        }
        let l = n.ln();
        Ok(self.t_logn * l + self.t_loglogn * l.ln() + self.poly(1.0 / l))
    }
}

/// `log` of `C · n^d · (log n)^(log α) · Σ e_j / log^j n`, with `C` the
/// leading constant supplied by the caller.
pub fn theorem1_log_eval(model: &PrimeModel, leading: f64, exp: &Expansion, n: u64) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("n must be at least 3, got {n}")));
    }
    if exp.e[0] != 1.0 {
        return Err(Error::InvalidArgument("correction factor must start at 1".into()));
    }
    let l = (n as f64).ln();
    let factor = exp.poly(1.0 / l);
    if !(factor > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "correction factor {factor} is not positive at n={n}"
        )));
    }
    Ok(leading.ln() + model.d * l + model.alpha.ln() * l.ln() + factor.ln())
}

/// Predicted `G_f(n)`. Evaluated as a plain product when that is finite,
/// otherwise through [`theorem1_log_eval`].
pub fn theorem1_eval(model: &PrimeModel, leading: f64, exp: &Expansion, n: u64) -> Result<f64> {
    let log_value = theorem1_log_eval(model, leading, exp, n)?;
    let nf = n as f64;
    let l = nf.ln();
    let direct = leading * nf.powf(model.d) * l.powf(model.alpha.ln()) * exp.poly(1.0 / l);
    Ok(if direct.is_finite() && direct > 0.0 {
        direct
    } else {
        log_value.exp()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitWindow {
    pub n_min: u64,
    pub n_max: u64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    /// `c_1..c_order` of the basis `1/log^j n`.
    pub coefficients: Vec<f64>,
    /// Fitted constant term, when requested.
    pub constant: Option<f64>,
    pub residual_norm: f64,
    pub condition_estimate: f64,
    pub window: FitWindow,
}

/// Least squares of `residual ≈ [c_0] + Σ_{j=1}^{order} c_j / log^j n` by
/// Householder QR on the column-equilibrated basis. The condition estimate
/// is `max |R_ii| / min |R_ii|` of that factorization.
pub fn fit_coefficients(samples: &[(u64, f64)], order: usize, with_constant: bool) -> Result<FitResult> {
    check_order(order)?;
    let cols = order + with_constant as usize;
    if cols == 0 {
        return Err(Error::InvalidArgument(
            "nothing to fit: order 0 without constant".into(),
        ));
    }
    if samples.len() < order + 2 || samples.len() < cols + 1 {
        return Err(Error::InvalidArgument(format!(
            "{} samples are too few for order {order}",
            samples.len()
        )));
    }
    let mut ns: Vec<u64> = samples.iter().map(|s| s.0).collect();
    ns.sort_unstable();
    if ns[0] < 100 {
        return Err(Error::InvalidArgument(format!(
            "sample n must be >= 100, got {}",
            ns[0]
        )));
    }
    if ns.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument("sample n values must be distinct".into()));
    }

    let offset = with_constant as usize;
    let a = DMatrix::from_fn(samples.len(), cols, |row, col| {
        let x = 1.0 / (samples[row].0 as f64).ln();
        x.powi((col + 1 - offset) as i32)
    });
    let b = DVector::from_iterator(samples.len(), samples.iter().map(|s| s.1));
    // Equilibrate columns so the powers of 1/log n are on one scale.
    let scale: Vec<f64> = a.column_iter().map(|c| c.norm()).collect();
    let mut scaled = a.clone();
    for (mut c, s) in scaled.column_iter_mut().zip(&scale) {
        c /= *s;
    }
    let qr = scaled.clone().qr();
    let q = qr.q();
    let r = qr.r();
    let diag: Vec<f64> = r.diagonal().iter().map(|v| v.abs()).collect();
    let max = diag.iter().cloned().fold(0.0, f64::max);
    let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned { condition });
    }
    let solve = |rhs: &DVector<f64>| {
        r.solve_upper_triangular(&(q.transpose() * rhs))
            .ok_or(Error::IllConditioned { condition })
    };
    let mut y = solve(&b)?;
    // One round of iterative refinement on the residual.
    let resid = &b - &scaled * &y;
    y += solve(&resid)?;
    let x = DVector::from_iterator(cols, y.iter().zip(&scale).map(|(v, s)| v / s));
    let residual_norm = (&a * &x - &b).norm();
    let coef: Vec<f64> = x.iter().copied().collect();
    Ok(FitResult {
        constant: with_constant.then(|| coef[0]),
        coefficients: coef[offset..].to_vec(),
        residual_norm,
        condition_estimate: condition,
        window: FitWindow {
            n_min: ns[0],
            n_max: *ns.last().expect("nonempty"),
            points: samples.len(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multfunc::builtin;

    #[test]
    fn factorial_coefficients() {
        assert_eq!(li_coeffs(3).unwrap(), [1, 1, 2]);
        assert_eq!(li_coeffs(1).unwrap(), [1]);
        assert_eq!(li_coeffs(5).unwrap(), [1, 1, 2, 6, 24]);
        assert_eq!(lj_coeffs(1, 3).unwrap(), [1, 1, 2]);
        assert_eq!(lj_coeffs(2, 3).unwrap(), [1, 2]);
        assert_eq!(lj_coeffs(3, 4).unwrap(), [1, 3]);
        assert!(lj_coeffs(4, 3).is_err());
        assert!(li_coeffs(13).is_err());
        for r in 1..=MAX_ORDER {
            assert_eq!(lj_coeffs(1, r).unwrap(), li_coeffs(r).unwrap());
        }
    }

    #[test]
    fn recurrence_holds() {
        assert!(lj_recurrence_check(2, 6).unwrap());
        assert!(lj_recurrence_check(3, 8).unwrap());
        assert!(lj_recurrence_check(5, 5).unwrap());
        for r in 2..=MAX_ORDER {
            for j in 2..=r {
                assert!(lj_recurrence_check(j, r).unwrap());
            }
        }
        assert!(lj_recurrence_check(1, 4).is_err());
    }

    #[test]
    fn exp_examples() {
        let c = 0.3;
        let g = series_exp(&[c, 0.0]).unwrap();
        assert_eq!(g, vec![1.0, c, c * c / 2.0]);
        assert_eq!(series_exp::<f64>(&[]).unwrap(), vec![1.0]);
        assert_eq!(series_exp(&[1.0, 1.0]).unwrap(), vec![1.0, 1.0, 1.5]);
        assert!(series_exp(&[0.0; 13]).is_err());
    }

    #[test]
    fn s2_transform_examples() {
        assert_eq!(s2_coeffs_from_d(&[0.5, 2.0]).unwrap(), vec![1.5]);
        assert_eq!(s2_coeffs_from_d(&[0.0, 0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(s2_coeffs_from_d(&[1.0, 0.0, 0.0]).unwrap(), vec![-1.0, -1.0]);
        assert!(s2_coeffs_from_d(&[1.0]).is_err());
    }

    #[test]
    fn leading_term_examples() {
        let kappa = builtin("kappa").unwrap();
        let lead = 0.172_8;
        let flat = Expansion::correction(&[]).unwrap();
        assert_eq!(theorem1_eval(&kappa, lead, &flat, 1000).unwrap(), lead * 1000.0);
        let two = builtin("two_omega").unwrap();
        let n = 1_000_000u64;
        let want = lead * (n as f64).ln().powf(2f64.ln());
        assert!((theorem1_eval(&two, lead, &flat, n).unwrap() / want - 1.0).abs() < 1e-14);
        let zero_c1 = Expansion::correction(&[0.0]).unwrap();
        assert_eq!(
            theorem1_eval(&kappa, lead, &flat, 20).unwrap(),
            theorem1_eval(&kappa, lead, &zero_c1, 20).unwrap()
        );
        assert!(theorem1_eval(&kappa, lead, &flat, 2).is_err());
        // Far past f64 range the log form still works.
        let j = builtin("jordan_64").unwrap();
        assert!(theorem1_log_eval(&j, lead, &flat, 1 << 40).unwrap().is_finite());
    }

    #[test]
    fn fit_examples() {
        let ns: Vec<u64> = (0..8).map(|i| 1000 * 4u64.pow(i)).collect();
        let s: Vec<(u64, f64)> = ns.iter().map(|&n| (n, 2.0 / (n as f64).ln())).collect();
        let f = fit_coefficients(&s, 1, false).unwrap();
        assert!((f.coefficients[0] - 2.0).abs() < 1e-9);
        assert!(f.condition_estimate >= 1.0);
        let s: Vec<(u64, f64)> = ns
            .iter()
            .map(|&n| {
                let x = 1.0 / (n as f64).ln();
                (n, x + 3.0 * x * x)
            })
            .collect();
        let f = fit_coefficients(&s, 2, false).unwrap();
        assert!((f.coefficients[0] - 1.0).abs() < 1e-6 && (f.coefficients[1] - 3.0).abs() < 1e-6);
        let s: Vec<(u64, f64)> = ns.iter().map(|&n| (n, 0.0)).collect();
        let f = fit_coefficients(&s, 3, true).unwrap();
        assert!(f.coefficients.iter().all(|&c| c == 0.0));
        assert_eq!(f.constant, Some(0.0));
        assert_eq!(
            f.window,
            FitWindow {
                n_min: 1000,
                n_max: 1000 * 4u64.pow(7),
                points: 8
            }
        );
    }

    #[test]
    fn fit_refuses_collinear_basis() {
        let s: Vec<(u64, f64)> = (0..20).map(|i| (1_000_000 + i, 0.0)).collect();
        assert!(matches!(
            fit_coefficients(&s, 6, true),
            Err(Error::IllConditioned { .. })
        ));
        assert!(fit_coefficients(&s[..3], 2, false).is_err());
        let dup = vec![(1000, 0.0), (1000, 0.0), (2000, 0.0)];
        assert!(fit_coefficients(&dup, 1, false).is_err());
        let small = vec![(50, 0.0), (1000, 0.0), (2000, 0.0)];
        assert!(fit_coefficients(&small, 1, false).is_err());
    }
}
