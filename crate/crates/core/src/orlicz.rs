//! Luxemburg norms on weighted domains and the inequalities built on them.

use std::f64::consts::E;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{integrate, lp_norm, ScalarField, WeightedDomain};
use crate::roots;
use crate::young::{ConjugateForm, PowerLog, YoungFunction, YoungParams};

/// A Luxemburg norm together with the evidence that it is the infimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormReport {
    pub value: f64,
    /// `∫ A(|f|/value) v dx`; at most one.
    pub modular_at_value: f64,
    pub iterations: usize,
}

/// `∫ A(|f|/λ) v dx`.
pub fn modular<Y: YoungFunction + ?Sized>(f: &ScalarField, a: &Y, lambda: f64, dom: &WeightedDomain) -> Result<f64> {
    f.check_on(dom)?;
    if !(lambda > 0.0) {
        return Err(Error::domain(format!("modular needs λ > 0, got {lambda}")));
    }
    Ok(ln_modular(&abs_terms(f, dom), a, lambda).exp())
}

/// Nonzero `(|f_i|, v_i |cell_i|)` pairs.
fn abs_terms(f: &ScalarField, dom: &WeightedDomain) -> Vec<(f64, f64)> {
    f.values()
        .iter()
        .zip(dom.masses())
        .filter(|(x, m)| **x != 0.0 && *m > 0.0)
        .map(|(x, m)| (x.abs(), m))
        .collect()
}

/// Log of the modular, summed with log-sum-exp so that neither tiny λ nor
/// steep Young functions overflow.
fn ln_modular<Y: YoungFunction + ?Sized>(terms: &[(f64, f64)], a: &Y, lambda: f64) -> f64 {
    let logs: Vec<f64> = terms.iter().map(|(x, m)| m.ln() + a.ln_value(x / lambda)).collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return top;
    }
    top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln()
}

/// `inf{λ > 0 : ∫ A(|f|/λ) v dx <= 1}`.
pub fn luxemburg_norm<Y: YoungFunction + ?Sized>(f: &ScalarField, a: &Y, dom: &WeightedDomain) -> Result<NormReport> {
    f.check_on(dom)?;
    let terms = abs_terms(f, dom);
    if terms.is_empty() {
        return Ok(NormReport { value: 0.0, modular_at_value: 0.0, iterations: 0 });
    }
    let sup = terms.iter().fold(0.0f64, |m, (x, _)| m.max(*x));
    // A(|f|/hi) <= A(A^{-1}(1/v(Ω))) = 1/v(Ω) pointwise, so hi is feasible.
    let unit = a.inverse_value(1.0 / dom.total_mass());
    let mut hi = sup * if unit > 0.0 && unit.is_finite() { (1.0 / unit).max(1.0) } else { 1.0 };
    let feasible = |lam: f64| ln_modular(&terms, a, lam) <= 0.0;
    while !feasible(hi) {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Range("no feasible λ for the Luxemburg gauge".into()));
        }
    }
    let mut lo = hi * 2f64.powi(-60);
    while feasible(lo) {
        lo *= 2f64.powi(-60);
        if lo == 0.0 {
            return Err(Error::Range("Luxemburg gauge collapsed to zero".into()));
        }
    }
    let b = roots::bisect_geometric(lo, hi, feasible);
    Ok(NormReport { value: b.hi, modular_at_value: ln_modular(&terms, a, b.hi).exp(), iterations: b.iterations })
}

/// Norm in the space of the numeric Legendre conjugate of `a`.
pub fn conjugate_norm(g: &ScalarField, a: &YoungParams, dom: &WeightedDomain) -> Result<NormReport> {
    luxemburg_norm(g, &ConjugateForm::numeric(*a), dom)
}

/// Both sides of `∫|fg| v dx <= 2 ‖f‖_A ‖g‖_Ā`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn holder_pairing(f: &ScalarField, g: &ScalarField, a: &YoungParams, dom: &WeightedDomain) -> Result<HolderReport> {
    f.same_domain(g)?;
    let fg = f.product(g)?.map(f64::abs);
    let lhs = integrate(&fg, dom)?;
    let rhs = 2.0 * luxemburg_norm(f, a, dom)?.value * conjugate_norm(g, a, dom)?.value;
    Ok(HolderReport { lhs, rhs, holds: lhs <= rhs * (1.0 + 1e-9) })
}

/// `‖1_S‖_Ā = 1 / Ā^{-1}(1/v(S))` for a set of measure `mass`.
pub fn indicator_norm(a: &YoungParams, mass: f64) -> Result<f64> {
    if !(mass.is_finite() && mass > 0.0) {
        return Err(Error::domain(format!("indicator mass must be > 0, got {mass}")));
    }
    Ok(1.0 / a.conjugate_inverse(1.0 / mass)?)
}

/// Indicator norm divided by the model `mass^{1/p'} / L^{q/p}`, once with
/// `L = ln(1 + 1/mass)` and once with `L = ln(e + 1/mass)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndicatorBound {
    pub m0: f64,
    pub ratio_log1p: f64,
    pub ratio_loge: f64,
}

pub fn indicator_bound(a: &YoungParams, mass: f64) -> Result<IndicatorBound> {
    let m0 = indicator_norm(a, mass)?;
    let power = mass.powf(1.0 / a.conjugate_exponent());
    let ex = a.q() / a.p();
    Ok(IndicatorBound {
        m0,
        ratio_log1p: m0 * (1.0 + 1.0 / mass).ln().powf(ex) / power,
        ratio_loge: m0 * (E + 1.0 / mass).ln().powf(ex) / power,
    })
}

/// The four norms `‖f‖_{p1}, ‖f‖_A, ‖f‖_{p2}, ‖f‖_B` and the ratios of
/// consecutive entries, i.e. the smallest constants realising each step
/// of the chain for this `f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainReport {
    pub norms: [f64; 4],
    pub constants: [f64; 3],
}

impl ChainReport {
    pub fn holds_with(&self, bound: f64) -> bool {
        self.constants.iter().all(|c| *c <= bound)
    }
}

pub fn norm_chain_check(
    f: &ScalarField,
    (p1, q1): (f64, f64),
    (p2, q2): (f64, f64),
    dom: &WeightedDomain,
) -> Result<ChainReport> {
    if !(1.0 <= p1 && p1 <= p2 && 0.0 <= q1 && q1 <= q2) {
        return Err(Error::domain(format!("need 1 <= p1 <= p2 and 0 <= q1 <= q2, got ({p1}, {q1}), ({p2}, {q2})")));
    }
    let a = PowerLog::new(p1, q1)?;
    let b = PowerLog::new(p2, q2)?;
    let norms = [
        lp_norm(f, p1, dom)?,
        luxemburg_norm(f, &a, dom)?.value,
        lp_norm(f, p2, dom)?,
        luxemburg_norm(f, &b, dom)?.value,
    ];
    let ratio = |x: f64, y: f64| if x == 0.0 { 0.0 } else { x / y };
    let constants = [ratio(norms[0], norms[1]), ratio(norms[1], norms[2]), ratio(norms[2], norms[3])];
    Ok(ChainReport { norms, constants })
}
