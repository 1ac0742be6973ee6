//! Radial data profiles and Green-function quadrature on balls.

use std::f64::consts::E;

use crate::error::{Error, Result};
use crate::measure::{graded_radial_edges, unit_ball_volume, Geometry, ScalarField, WeightSpec, WeightedDomain};

use super::config::DataKind;

/// A radial right-hand side, evaluated at `r = |x|` on a ball of radius `R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    Constant,
    /// `(1 - (r/R)²)²`
    Bump,
    /// `exp(-(r / 0.2R)²)`
    Peak,
    /// `exp(-((r - R/2) / 0.1R)²)`
    Shell,
    /// `r^{-2} / ln(e + 1/r)` cut off below `2^{-k-1}`.
    Truncated { k: u32 },
    /// `r^{-2}` cut off below `e^{-depth}`.
    Spike { depth: f64 },
}

impl Profile {
    pub fn name(&self) -> String {
        match self {
            Profile::Constant => "constant".into(),
            Profile::Bump => "bump".into(),
            Profile::Peak => "peak".into(),
            Profile::Shell => "shell".into(),
            Profile::Truncated { k } => format!("truncated_k{k}"),
            Profile::Spike { depth } => format!("spike_T{depth}"),
        }
    }

    pub fn eval(&self, r: f64, radius: f64) -> f64 {
        let s = r / radius;
        match *self {
            Profile::Constant => 1.0,
            Profile::Bump => (1.0 - s * s).max(0.0).powi(2),
            Profile::Peak => (-(s / 0.2).powi(2)).exp(),
            Profile::Shell => (-((s - 0.5) / 0.1).powi(2)).exp(),
            Profile::Truncated { k } => {
                let lo = 0.5f64.powi(k as i32 + 1);
                let chi = ramp(r, lo, 2.0 * lo);
                if chi == 0.0 {
                    0.0
                } else {
                    chi * log_profile(r)
                }
            }
            Profile::Spike { depth } => {
                let hi = (-depth).exp();
                let chi = ramp(r, 0.5 * hi, hi);
                if chi == 0.0 {
                    0.0
                } else {
                    chi / (r * r)
                }
            }
        }
    }

    /// Smallest radius below which the profile vanishes, if any.
    pub fn cutoff(&self) -> Option<f64> {
        match *self {
            Profile::Truncated { k } => Some(0.5f64.powi(k as i32 + 1)),
            Profile::Spike { depth } => Some(0.5 * (-depth).exp()),
            _ => None,
        }
    }

    pub fn field(&self, dom: &WeightedDomain) -> Result<ScalarField> {
        let radius = match dom.geometry() {
            Geometry::RadialBall { radius, .. } => *radius,
            _ => return Err(Error::Structural("radial profiles need a ball".into())),
        };
        ScalarField::from_fn(dom, |x| self.eval(x[0], radius))
    }
}

/// `r^{-2} / ln(e + 1/r)`.
pub fn log_profile(r: f64) -> f64 {
    1.0 / (r * r * (E + 1.0 / r).ln())
}

/// Continuous ramp: 0 below `lo`, 1 above `hi`, linear between.
pub fn ramp(r: f64, lo: f64, hi: f64) -> f64 {
    ((r - lo) / (hi - lo)).clamp(0.0, 1.0)
}

/// Data members for a scenario.
pub fn family(kind: DataKind) -> Vec<Profile> {
    match kind {
        DataKind::Family => vec![
            Profile::Constant,
            Profile::Bump,
            Profile::Peak,
            Profile::Shell,
            Profile::Truncated { k: 3 },
        ],
        DataKind::Constant => vec![Profile::Constant],
        DataKind::Bump => vec![Profile::Bump],
        DataKind::Zero => vec![],
    }
}

/// Graded ball mesh resolving a cutoff at `cutoff` with `cells_per_e_fold`
/// shells per factor `e`, plus two e-folds of padding inside the cutoff.
pub fn graded_ball(n: usize, radius: f64, cutoff: f64, cells_per_e_fold: usize, weight: &WeightSpec) -> Result<WeightedDomain> {
    let inner = cutoff * (-2.0f64).exp();
    WeightedDomain::ball_with_edges(n, graded_radial_edges(radius, inner, cells_per_e_fold)?, weight)
}

/// `c_n = 1 / (n (n-2) ω_n)`, `ω_n` the unit-ball volume.
pub fn green_constant(n: usize) -> f64 {
    1.0 / (n as f64 * (n as f64 - 2.0) * unit_ball_volume(n))
}

/// Value at the origin of the Newtonian potential `c_n ∫ |x|^{2-n} f dx`
/// and of the Dirichlet solution `c_n ∫ (|x|^{2-n} - R^{2-n}) f dx`.
pub fn green_at_origin(f: &ScalarField, dom: &WeightedDomain) -> Result<(f64, f64)> {
    f.check_on(dom)?;
    let (n, radius) = match dom.geometry() {
        Geometry::RadialBall { n, radius } => (*n, *radius),
        _ => return Err(Error::Structural("Green quadrature needs a ball".into())),
    };
    let e = 2.0 - n as f64;
    let rim = radius.powf(e);
    let cn = green_constant(n);
    let mut free = 0.0;
    let mut dirichlet = 0.0;
    for (i, (fi, vol)) in f.values().iter().zip(dom.cell_volumes()).enumerate() {
        let k = dom.radius_of(i).powf(e);
        free += fi * k * vol;
        dirichlet += fi * (k - rim) * vol;
    }
    Ok((cn * free, cn * dirichlet))
}
