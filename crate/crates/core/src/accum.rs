//! Compensated summation with a running error bound.
//!
//! Every real-valued sum in the crate goes through [`NeumaierSum`]. Besides
//! the compensated pair it tracks `Σ|x_i|` and the term count, which is all
//! the error model below needs:
//!
//! ```text
//! |computed − exact| ≤ TERM_REL_ERR·Σ|x_i| + 2u·|S| + 2·m·u²·Σ|x_i|
//! ```
//!
//! where `u = 2⁻⁵³` and `m` is the number of terms. The first term covers
//! the rounding made while *forming* each summand (a `ln`, a product, a
//! division), the other two are the standard Neumaier bound.

use serde::{Deserialize, Serialize};

/// Unit roundoff for f64.
pub const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

/// Relative error allowed for forming one summand (`ln` within one ulp,
/// one product, one quotient).
pub const TERM_REL_ERR: f64 = 4.0 * UNIT_ROUNDOFF;

/// A (value, compensation) pair as stored in reports and cache files.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Compensated {
    pub value: f64,
    pub compensation: f64,
}

impl Compensated {
    pub fn get(&self) -> f64 {
        self.value + self.compensation
    }
}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
    abs: f64,
    terms: u64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
        self.abs += x.abs();
        self.terms += 1;
    }

    /// Fold another partial sum into this one. Order matters for bit-level
    /// reproducibility, so callers merge partials in a fixed order.
    pub fn merge(&mut self, other: &NeumaierSum) {
        let (abs, terms) = (self.abs + other.abs, self.terms + other.terms);
        self.add(other.sum);
        self.add(other.comp);
        self.abs = abs;
        self.terms = terms;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    pub fn abs_sum(&self) -> f64 {
        self.abs
    }

    pub fn terms(&self) -> u64 {
        self.terms
    }

    pub fn compensated(&self) -> Compensated {
        Compensated {
            value: self.sum,
            compensation: self.comp,
        }
    }

    pub fn error_bound(&self) -> f64 {
        let u = UNIT_ROUNDOFF;
        TERM_REL_ERR * self.abs + 2.0 * u * self.value().abs() + 2.0 * (self.terms as f64) * u * u * self.abs
    }

    pub fn summed(&self) -> Summed {
        Summed {
            value: self.value(),
            err_bound: self.error_bound(),
        }
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// A finished sum together with its accumulation error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summed {
    pub value: f64,
    pub err_bound: f64,
}
