//! De Giorgi level-set iteration: levels `C_k ↑ r0`, the ledger of
//! level-set measures, the threshold for `τ0`, the arithmetic induction
//! `m_k >= m0 + k`, and the exponent bookkeeping used for the sharpened
//! bound.

use std::f64::consts::E;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{level_set_measure, lp_norm, ScalarField, WeightedDomain};
use crate::orlicz::luxemburg_norm;
use crate::young::YoungParams;

/// Hölder conjugate `s / (s - 1)`.
pub fn dual(s: f64) -> f64 {
    s / (s - 1.0)
}

/// Parameters driving the iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationParams {
    pub sigma: f64,
    pub q: f64,
    /// `q/σ' - 1`.
    pub epsilon: f64,
    /// Constant of the one-step level-set inequality.
    pub c: f64,
    pub tau0: f64,
    /// `τ0 ‖f‖_A`, the target level.
    pub r0: f64,
}

impl IterationParams {
    /// Validates `q > σ'` and `τ0 >= tau0_threshold(C, ε)`.
    pub fn new(sigma: f64, q: f64, c: f64, tau0: f64, data_norm: f64) -> Result<Self> {
        let epsilon = epsilon_for(sigma, q)?;
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::domain(format!("iteration constant must be > 0, got {c}")));
        }
        let threshold = tau0_threshold(c, epsilon)?;
        if !(tau0 >= threshold * (1.0 - 1e-12)) {
            return Err(Error::domain(format!("τ0 = {tau0} is below the threshold {threshold}")));
        }
        if !(data_norm > 0.0 && data_norm.is_finite()) {
            return Err(Error::domain(format!("data norm must be > 0, got {data_norm}")));
        }
        Ok(Self { sigma, q, epsilon, c, tau0, r0: tau0 * data_norm })
    }

    /// Same, with `τ0` set to the threshold.
    pub fn at_threshold(sigma: f64, q: f64, c: f64, data_norm: f64) -> Result<Self> {
        let epsilon = epsilon_for(sigma, q)?;
        Self::new(sigma, q, c, tau0_threshold(c, epsilon)?, data_norm)
    }
}

/// `ε = q/σ' - 1`, rejected unless positive.
pub fn epsilon_for(sigma: f64, q: f64) -> Result<f64> {
    if !(sigma > 1.0 && sigma.is_finite()) {
        return Err(Error::domain(format!("σ must be > 1, got {sigma}")));
    }
    let eps = q / dual(sigma) - 1.0;
    if !(eps > 0.0) {
        return Err(Error::domain(format!("need q > σ' = {}, got q = {q}", dual(sigma))));
    }
    Ok(eps)
}

/// `C_0, ..., C_K` with `C_k = r0 (1 - (k+1)^{-ε})` and `C_0 = C_1/2`.
pub fn levels(r0: f64, epsilon: f64, k_max: usize) -> Result<Vec<f64>> {
    if !(r0 > 0.0 && epsilon > 0.0) {
        return Err(Error::domain(format!("need r0 > 0 and ε > 0, got {r0}, {epsilon}")));
    }
    let level = |k: usize| r0 * (1.0 - ((k + 1) as f64).powf(-epsilon));
    let mut out: Vec<f64> = (0..=k_max.max(1)).map(level).collect();
    out[0] = 0.5 * out[1];
    out.truncate(k_max + 1);
    Ok(out)
}

/// Lower bound `ε r0 / (k+2)^{1+ε}` for the gap `C_{k+1} - C_k`.
pub fn level_gap_bound(r0: f64, epsilon: f64, k: usize) -> f64 {
    epsilon * r0 / ((k + 2) as f64).powf(1.0 + epsilon)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LedgerRow {
    pub k: usize,
    pub c_k: f64,
    /// `v(S(C_k))`.
    pub mu: f64,
    /// `ln(1/μ_k)`; infinite once the level set is empty.
    pub m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeGiorgiLedger {
    pub rows: Vec<LedgerRow>,
    pub r0: f64,
    #[serde(skip)]
    pub source_field: u64,
}

impl DeGiorgiLedger {
    /// `true` when some level set in the ledger is empty, i.e. `u <= C_k < r0`
    /// there.
    pub fn terminated(&self) -> bool {
        self.rows.last().is_some_and(|r| r.mu == 0.0)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "k,C_k,mu_k,m_k")?;
        for r in &self.rows {
            writeln!(out, "{},{},{},{}", r.k, r.c_k, r.mu, r.m)?;
        }
        Ok(())
    }
}

/// Level-set measures of `u` at `C_0..C_K`; stops at the first empty set.
pub fn build_ledger(u: &ScalarField, params: &IterationParams, dom: &WeightedDomain, k_max: usize) -> Result<DeGiorgiLedger> {
    ledger_at_levels(u, params.r0, params.epsilon, dom, k_max)
}

/// Ledger for explicit `r0` and `ε`, without the `τ0` bookkeeping.
pub fn ledger_at_levels(u: &ScalarField, r0: f64, epsilon: f64, dom: &WeightedDomain, k_max: usize) -> Result<DeGiorgiLedger> {
    u.check_on(dom)?;
    let slack = 1e-10 * u.abs_max().max(1e-300);
    if u.min() < -slack {
        return Err(Error::domain("ledger needs a nonnegative field"));
    }
    let mut rows = Vec::new();
    for (k, c_k) in levels(r0, epsilon, k_max)?.into_iter().enumerate() {
        let mu = level_set_measure(u, c_k, dom)?;
        let m = if mu > 0.0 { -mu.ln() } else { f64::INFINITY };
        rows.push(LedgerRow { k, c_k, mu, m });
        if mu == 0.0 {
            break;
        }
    }
    Ok(DeGiorgiLedger { rows, r0, source_field: u.domain_id() })
}

/// `max{2^{ε+1} e C / (2^ε - 1), e C / ε}`.
pub fn tau0_threshold(c: f64, epsilon: f64) -> Result<f64> {
    if !(c > 0.0 && epsilon > 0.0) {
        return Err(Error::domain(format!("need C > 0 and ε > 0, got {c}, {epsilon}")));
    }
    let two_eps = 2f64.powf(epsilon);
    Ok((2.0 * two_eps * E * c / (two_eps - 1.0)).max(E * c / epsilon))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InductionReport {
    pub holds: bool,
    pub first_failure: Option<usize>,
    /// Value of `m_K` (or of `m_k` at the first failure).
    pub last_m: f64,
}

/// Iterates the lower bound
/// `m_{k+1} = 2σ ln(ετ0/C) + (2σq/σ') ln(m_k/(k+2)) + m_k` from `m_0` and
/// checks `m_k >= m0 + k` for `k <= K`.
pub fn induction_verify(m0: f64, k_max: usize, sigma: f64, q: f64, epsilon: f64, tau0: f64, c: f64) -> Result<InductionReport> {
    let eps_expected = epsilon_for(sigma, q)?;
    if !(epsilon > 0.0) || (epsilon - eps_expected).abs() > 1e-9 * eps_expected.max(1.0) {
        return Err(Error::domain(format!("ε must equal q/σ' - 1 = {eps_expected}, got {epsilon}")));
    }
    if !(m0 >= 2.0) {
        return Err(Error::domain(format!("m0 must be >= 2, got {m0}")));
    }
    if !(tau0 > 0.0 && c > 0.0) {
        return Err(Error::domain("τ0 and C must be positive"));
    }
    let head = 2.0 * sigma * (epsilon * tau0 / c).ln();
    let slope = 2.0 * sigma * q / dual(sigma);
    let mut m = m0;
    for k in 0..k_max {
        if m <= 0.0 {
            return Ok(InductionReport { holds: false, first_failure: Some(k), last_m: m });
        }
        m = head + slope * (m / (k + 2) as f64).ln() + m;
        if m < m0 + (k + 1) as f64 {
            return Ok(InductionReport { holds: false, first_failure: Some(k + 1), last_m: m });
        }
    }
    Ok(InductionReport { holds: true, first_failure: None, last_m: m })
}

/// Largest ratio of the one-step inequality over a grid of level pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalConstant {
    /// Smallest `C` for which the inequality holds on every pair.
    pub c: f64,
    /// Pair `(r, s)` attaining it.
    pub argmax: (f64, f64),
    /// Whether `v(S(s))^{1/2σ}(s-r) <= ‖φ_r 1_{S(s)}‖_{2σ}` held everywhere.
    pub left_holds: bool,
    pub pairs: usize,
    /// Pairs skipped because `S(r)` was empty.
    pub skipped: usize,
}

/// For each `r < s` in `r_grid` computes
/// `v(S(s))^{1/2σ} (s-r) ln(e + 1/μ(r))^{q/σ'} / (‖f‖_A μ(r)^{1/2σ})`
/// and returns the maximum.
pub fn empirical_constant(
    u: &ScalarField,
    f: &ScalarField,
    a: &YoungParams,
    sigma: f64,
    dom: &WeightedDomain,
    r_grid: &[f64],
) -> Result<EmpiricalConstant> {
    if !(sigma > 1.0) {
        return Err(Error::domain(format!("σ must be > 1, got {sigma}")));
    }
    if r_grid.len() < 2 || r_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("r_grid must be increasing with at least two points"));
    }
    u.check_on(dom)?;
    let f_norm = luxemburg_norm(f, a, dom)?.value;
    if f_norm == 0.0 {
        return Err(Error::domain("data has zero Orlicz norm"));
    }
    let two_sigma = 2.0 * sigma;
    let log_power = a.q() / dual(sigma);
    let mu: Vec<f64> = r_grid.iter().map(|r| level_set_measure(u, *r, dom)).collect::<Result<_>>()?;
    let mut best = EmpiricalConstant { c: 0.0, argmax: (r_grid[0], r_grid[1]), left_holds: true, pairs: 0, skipped: 0 };
    for (i, &r) in r_grid.iter().enumerate() {
        if mu[i] == 0.0 {
            best.skipped += r_grid.len() - i - 1;
            continue;
        }
        let phi = u.map(|x| (x - r).max(0.0));
        for (j, &s) in r_grid.iter().enumerate().skip(i + 1) {
            best.pairs += 1;
            let lhs = mu[j].powf(1.0 / two_sigma) * (s - r);
            let restricted = ScalarField::from_values(
                dom,
                phi.values().iter().zip(u.values()).map(|(p, x)| if *x > s { *p } else { 0.0 }).collect(),
            )?;
            let middle = lp_norm(&restricted, two_sigma, dom)?;
            if lhs > middle * (1.0 + 1e-12) {
                best.left_holds = false;
            }
            let c = lhs * (E + 1.0 / mu[i]).ln().powf(log_power) / (f_norm * mu[i].powf(1.0 / two_sigma));
            if c > best.c {
                best.c = c;
                best.argmax = (r, s);
            }
        }
    }
    Ok(best)
}

/// Exponents `(β, b, b̄, p)` with `b = 2σ(1-β)`, `b̄ = (1+β)(2σ)'` and
/// `1/b + 1/b̄ + 1/p = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentTriple {
    pub beta: f64,
    pub b: f64,
    pub b_bar: f64,
    pub p: f64,
}

impl ExponentTriple {
    /// `(2σ/b̄)((σ' - b̄)/σ' + (2σ - b)/(2σ))`, identically one.
    pub fn gamma(&self, sigma: f64) -> f64 {
        let sp = dual(sigma);
        2.0 * sigma / self.b_bar * ((sp - self.b_bar) / sp + (2.0 * sigma - self.b) / (2.0 * sigma))
    }

    pub fn holder_sum(&self) -> f64 {
        1.0 / self.b + 1.0 / self.b_bar + 1.0 / self.p
    }
}

/// `β = θ · min{1/2, (σ' - (2σ)')/(2σ)', 1/σ'}`.
pub fn exponent_triple(sigma: f64, theta: f64) -> Result<ExponentTriple> {
    if !(sigma > 1.0 && sigma.is_finite()) {
        return Err(Error::domain(format!("σ must be > 1, got {sigma}")));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::domain(format!("θ must lie in (0, 1), got {theta}")));
    }
    let sp = dual(sigma);
    let tsp = dual(2.0 * sigma);
    let beta = theta * 0.5f64.min((sp - tsp) / tsp).min(1.0 / sp);
    let b = 2.0 * sigma * (1.0 - beta);
    let b_bar = (1.0 + beta) * tsp;
    let p = 1.0 / (1.0 - 1.0 / b - 1.0 / b_bar);
    Ok(ExponentTriple { beta, b, b_bar, p })
}
