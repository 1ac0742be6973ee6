//! Bracketing root finders shared by the Young-function and norm code.
//!
//! Every function handled here is monotone, so plain bisection on a
//! verified bracket is always safe.

/// Relative tolerance on the bracket width.
pub const RTOL: f64 = 1e-12;
/// Hard cap on bisection steps.
pub const MAX_ITER: usize = 200;

/// Result of a bracketed search: `lo <= root <= hi` after `iterations` steps.
#[derive(Debug, Clone, Copy)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub iterations: usize,
}

impl Bracket {
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Bisects `[lo, hi]` for the point where the nondecreasing predicate
/// `above(x)` switches from `false` to `true`.
///
/// Requires `above(lo) == false` and `above(hi) == true`; the caller is
/// responsible for that bracket.
pub fn bisect<F>(mut lo: f64, mut hi: f64, mut above: F) -> Bracket
where
    F: FnMut(f64) -> bool,
{
    let mut iterations = 0;
    while iterations < MAX_ITER && hi - lo > RTOL * hi.abs().max(f64::MIN_POSITIVE) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if above(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    Bracket { lo, hi, iterations }
}

/// Same as [`bisect`] but splits at the geometric mean, for positive
/// brackets spanning many orders of magnitude.
pub fn bisect_geometric<F>(mut lo: f64, mut hi: f64, mut above: F) -> Bracket
where
    F: FnMut(f64) -> bool,
{
    debug_assert!(lo > 0.0 && hi > lo);
    let mut iterations = 0;
    while iterations < MAX_ITER && hi / lo - 1.0 > RTOL {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if above(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    Bracket { lo, hi, iterations }
}

/// Expands `[guess/2, guess*2]` geometrically until `above(lo)` is false
/// and `above(hi)` is true. Returns `None` if no bracket exists within
/// the finite positive floats.
pub fn bracket_positive<F>(guess: f64, mut above: F) -> Option<(f64, f64)>
where
    F: FnMut(f64) -> bool,
{
    let guess = if guess.is_finite() && guess > 0.0 { guess } else { 1.0 };
    let mut lo = guess * 0.5;
    let mut hi = guess * 2.0;
    while !above(hi) {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return None;
        }
    }
    while above(lo) {
        hi = lo;
        lo *= 0.5;
        if lo == 0.0 {
            return None;
        }
    }
    Some((lo, hi))
}
