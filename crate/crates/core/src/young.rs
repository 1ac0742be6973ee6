//! Power-log Young functions `A(t) = t^p log(e+t)^q` and their conjugates.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots;

/// Anything that can play the role of a Young function in a Luxemburg gauge.
pub trait YoungFunction {
    fn value(&self, t: f64) -> f64;

    /// Natural log of `value(t)`; implementations override this when the
    /// value itself can overflow while the logarithm cannot.
    fn ln_value(&self, t: f64) -> f64 {
        self.value(t).ln()
    }

    /// The `t >= 0` with `value(t) = y`, found by bisection on `ln_value`.
    fn inverse_value(&self, y: f64) -> f64 {
        if y == 0.0 {
            return 0.0;
        }
        let target = y.ln();
        match roots::bracket_positive(y, |t| self.ln_value(t) >= target) {
            Some((lo, hi)) => roots::bisect(lo, hi, |t| self.ln_value(t) >= target).mid(),
            None => f64::INFINITY,
        }
    }
}

/// `t^p log(e+t)^q` for any `p >= 1`, `q >= 0`. Unlike [`YoungParams`]
/// this admits the borderline `p = 1`, where the function is only a Young
/// function when `q > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLog {
    pub p: f64,
    pub q: f64,
}

impl PowerLog {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0 && q.is_finite() && q >= 0.0) {
            return Err(Error::domain(format!("need p >= 1 and q >= 0, got ({p}, {q})")));
        }
        Ok(Self { p, q })
    }
}

impl YoungFunction for PowerLog {
    fn value(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        let base = t.powf(self.p);
        if self.q == 0.0 {
            base
        } else {
            base * (E + t).ln().powf(self.q)
        }
    }

    fn ln_value(&self, t: f64) -> f64 {
        if t == 0.0 {
            return f64::NEG_INFINITY;
        }
        let lt = t.ln();
        // ln(e + t) without overflowing for huge t.
        let l = if lt > 40.0 { lt + (1.0 + E / t).ln() } else { (E + t).ln() };
        self.p * lt + self.q * l.ln()
    }

    fn inverse_value(&self, y: f64) -> f64 {
        if y == 0.0 {
            return 0.0;
        }
        let target = y.ln();
        match roots::bracket_positive(y.powf(1.0 / self.p), |t| self.ln_value(t) >= target) {
            Some((lo, hi)) => roots::bisect(lo, hi, |t| self.ln_value(t) >= target).mid(),
            None => f64::INFINITY,
        }
    }
}

/// `ln(e + e^x)`, finite for every finite `x`.
fn ln_log_e_plus(x: f64) -> f64 {
    x.max(1.0) + (-(x - 1.0).abs()).exp().ln_1p()
}

/// Parameters of `A(t) = t^p log(e+t)^q` with `p > 1`, `q >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YoungParams {
    p: f64,
    q: f64,
}

impl YoungParams {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::domain(format!("Young exponent p must be > 1, got {p}")));
        }
        if !(q.is_finite() && q >= 0.0) {
            return Err(Error::domain(format!("Young log-exponent q must be >= 0, got {q}")));
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn power_log(&self) -> PowerLog {
        PowerLog { p: self.p, q: self.q }
    }

    /// Hölder conjugate `p' = p / (p - 1)`.
    pub fn conjugate_exponent(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        check_nonneg("t", t)?;
        Ok(self.value(t))
    }

    /// `A'(s) = s^(p-1) L^(q-1) (p L + q s / (e+s))` with `L = ln(e+s)`.
    pub fn derivative(&self, s: f64) -> f64 {
        if s == 0.0 {
            return 0.0;
        }
        let l = (E + s).ln();
        s.powf(self.p - 1.0) * l.powf(self.q - 1.0) * (self.p * l + self.q * s / (E + s))
    }

    pub fn inverse(&self, y: f64) -> Result<f64> {
        check_nonneg("y", y)?;
        Ok(self.inverse_value(y))
    }

    /// Numeric Legendre transform `sup_{s>0} (s t - A(s))`, located through
    /// the stationarity condition `A'(s) = t`.
    pub fn conjugate_eval(&self, t: f64) -> Result<f64> {
        check_nonneg("t", t)?;
        Ok(self.conjugate_value(t))
    }

    pub(crate) fn conjugate_value(&self, t: f64) -> f64 {
        self.conjugate_ln_value(t).exp()
    }

    /// `ln Ā(t) = ln s + ln t + ln(1 - A(s)/(s t))` at the maximiser `s`.
    /// There `A(s)/(s t) <= 1/p`, so nothing cancels, and the first-order
    /// error in `s` drops out.
    pub(crate) fn conjugate_ln_value(&self, t: f64) -> f64 {
        if t == 0.0 {
            return f64::NEG_INFINITY;
        }
        let lt = t.ln();
        let x = self.ln_stationary_point(lt);
        let ratio = self.ln_value_at_log(x) - x - lt;
        x + lt + (-ratio.min(0.0).exp_m1()).ln()
    }

    /// `ln A(e^x)` without forming `e^x`.
    fn ln_value_at_log(&self, x: f64) -> f64 {
        self.p * x + self.q * ln_log_e_plus(x).ln()
    }

    /// `ln A'(e^x)`.
    fn ln_derivative_at_log(&self, x: f64) -> f64 {
        let l = ln_log_e_plus(x);
        let frac = 1.0 / (1.0 + (1.0 - x).exp());
        (self.p - 1.0) * x + (self.q - 1.0) * l.ln() + (self.p * l + self.q * frac).ln()
    }

    /// `ln s` for the maximiser `s` of `s t - A(s)`, given `ln t`.
    fn ln_stationary_point(&self, lt: f64) -> f64 {
        let g = |x: f64| self.ln_derivative_at_log(x) - lt;
        let x0 = (lt - self.p.ln()) / (self.p - 1.0);
        let (mut lo, mut hi) = (x0 - 1.0, x0 + 1.0);
        let mut step = 1.0;
        while g(lo) > 0.0 {
            step *= 2.0;
            lo -= step;
        }
        step = 1.0;
        while g(hi) < 0.0 {
            step *= 2.0;
            hi += step;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Inverse of the numeric conjugate, `Ā^{-1}(y)`.
    pub fn conjugate_inverse(&self, y: f64) -> Result<f64> {
        check_nonneg("y", y)?;
        Ok(self.conjugate_inverse_value(y))
    }

    fn conjugate_inverse_value(&self, y: f64) -> f64 {
        if y == 0.0 {
            return 0.0;
        }
        let guess = y.powf(1.0 / self.conjugate_exponent()) * (E + y).ln().powf(self.q / self.p);
        let target = y.ln();
        match roots::bracket_positive(guess, |t| self.conjugate_ln_value(t) >= target) {
            Some((lo, hi)) => roots::bisect(lo, hi, |t| self.conjugate_ln_value(t) >= target).hi,
            None => f64::INFINITY,
        }
    }

    /// Closed-form equivalent of the conjugate,
    /// `t^{p'} / log(e+t)^{q (p'-1)}`.
    pub fn conjugate_closed(&self, t: f64) -> Result<f64> {
        check_nonneg("t", t)?;
        let pc = self.conjugate_exponent();
        Ok(t.powf(pc) / (E + t).ln().powf(self.q * (pc - 1.0)))
    }

    /// Closed-form equivalent of the conjugate inverse,
    /// `y^{1/p'} log(e+y)^{q/p}`.
    pub fn conjugate_inverse_closed(&self, y: f64) -> Result<f64> {
        if !(y.is_finite() && y > 0.0) {
            return Err(Error::domain(format!("y must be > 0, got {y}")));
        }
        Ok(y.powf(1.0 / self.conjugate_exponent()) * (E + y).ln().powf(self.q / self.p))
    }
}

impl YoungFunction for YoungParams {
    fn value(&self, t: f64) -> f64 {
        self.power_log().value(t)
    }

    fn ln_value(&self, t: f64) -> f64 {
        self.power_log().ln_value(t)
    }

    fn inverse_value(&self, y: f64) -> f64 {
        self.power_log().inverse_value(y)
    }
}

/// Which representative of the conjugate class to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConjugateKind {
    /// Supremum computed by root-finding; the ground truth.
    NumericLegendre,
    /// `t^{p'} / log(e+t)^{q(p'-1)}`, equal to the conjugate up to
    /// two-sided constants.
    ClosedForm,
}

/// The conjugate Young function of a power-log function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConjugateForm {
    pub kind: ConjugateKind,
    pub params: YoungParams,
}

impl ConjugateForm {
    pub fn numeric(params: YoungParams) -> Self {
        Self { kind: ConjugateKind::NumericLegendre, params }
    }

    pub fn closed(params: YoungParams) -> Self {
        Self { kind: ConjugateKind::ClosedForm, params }
    }

    /// Exponents `(p', q(p'-1))` of the closed form.
    pub fn closed_exponents(&self) -> (f64, f64) {
        let pc = self.params.conjugate_exponent();
        (pc, self.params.q * (pc - 1.0))
    }
}

impl YoungFunction for ConjugateForm {
    fn value(&self, t: f64) -> f64 {
        match self.kind {
            ConjugateKind::NumericLegendre => self.params.conjugate_value(t),
            ConjugateKind::ClosedForm => {
                if t == 0.0 {
                    0.0
                } else {
                    let (a, b) = self.closed_exponents();
                    t.powf(a) / (E + t).ln().powf(b)
                }
            }
        }
    }

    fn ln_value(&self, t: f64) -> f64 {
        match self.kind {
            ConjugateKind::NumericLegendre => self.params.conjugate_ln_value(t),
            ConjugateKind::ClosedForm => {
                if t == 0.0 {
                    return f64::NEG_INFINITY;
                }
                let (a, b) = self.closed_exponents();
                let lt = t.ln();
                a * lt - b * ln_log_e_plus(lt).ln()
            }
        }
    }

    fn inverse_value(&self, y: f64) -> f64 {
        match self.kind {
            ConjugateKind::NumericLegendre => self.params.conjugate_inverse_value(y),
            ConjugateKind::ClosedForm => {
                if y == 0.0 {
                    return 0.0;
                }
                let guess = y.powf(1.0 / self.params.conjugate_exponent());
                match roots::bracket_positive(guess, |t| self.value(t) >= y) {
                    Some((lo, hi)) => roots::bisect(lo, hi, |t| self.value(t) >= y).hi,
                    None => f64::INFINITY,
                }
            }
        }
    }
}

/// Outcome of a `A ≼ B` search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PreceqReport {
    pub holds: bool,
    /// Witness constant `c` with `A(t) <= B(c t)` for sampled `t >= t0`.
    pub c: Option<f64>,
    pub t0: Option<f64>,
}

/// Searches `c ∈ {2^j : 0 <= j <= 40}` and `t0` in `t_grid` (ascending) for
/// the first pair with `A(t) <= B(c t)` at every sampled `t >= t0`.
/// Comparisons are made in log space so that huge grids do not overflow.
pub fn preceq_check(a: &YoungParams, b: &YoungParams, t_grid: &[f64]) -> Result<PreceqReport> {
    if t_grid.is_empty() {
        return Err(Error::domain("t_grid is empty"));
    }
    if t_grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) || t_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("t_grid must be positive and strictly increasing"));
    }
    let ln_a: Vec<f64> = t_grid.iter().map(|&t| a.ln_value(t)).collect();
    for j in 0..=40 {
        let c = 2f64.powi(j);
        // Longest suffix of the grid on which the comparison holds.
        let mut first_valid = t_grid.len();
        for i in (0..t_grid.len()).rev() {
            let rhs = b.ln_value(c * t_grid[i]);
            if ln_a[i] <= rhs + 1e-12 * rhs.abs().max(1.0) {
                first_valid = i;
            } else {
                break;
            }
        }
        if first_valid < t_grid.len() {
            return Ok(PreceqReport { holds: true, c: Some(c), t0: Some(t_grid[first_valid]) });
        }
    }
    Ok(PreceqReport { holds: false, c: None, t0: None })
}

/// `n` log-uniform points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

fn check_nonneg(name: &str, x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        Err(Error::domain(format!("{name} must be >= 0, got {x}")))
    } else {
        Ok(())
    }
}
