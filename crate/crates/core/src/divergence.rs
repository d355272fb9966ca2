//! Scalar kernels: Bernoulli `kl`, binary entropy, Lambert W and the
//! quadratic root bound.
//!
//! Everything here is a pure `f64` function. Divergences live in
//! [`ExtNonNeg`] so that `+inf` (singular supports) is an ordinary value.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use crate::error::{Error, Result};

/// A non-negative real number or `+inf`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExtNonNeg(f64);

impl ExtNonNeg {
    pub const ZERO: ExtNonNeg = ExtNonNeg(0.0);
    pub const INFINITY: ExtNonNeg = ExtNonNeg(f64::INFINITY);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() || value < 0.0 {
            return Err(Error::domain(format!("{value} is not a non-negative extended real")));
        }
        Ok(ExtNonNeg(value))
    }

    /// Clamps tiny negative round-off (and `-0.0`) to zero.
    pub(crate) fn from_rounded(value: f64) -> Self {
        debug_assert!(!value.is_nan());
        ExtNonNeg(if value > 0.0 { value } else { 0.0 })
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// `self * weight` with the measure-theoretic convention `0 * inf = 0`.
    pub fn weighted(self, weight: f64) -> f64 {
        if weight == 0.0 {
            0.0
        } else {
            self.0 * weight
        }
    }
}

impl Eq for ExtNonNeg {}

impl PartialOrd for ExtNonNeg {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtNonNeg {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Add for ExtNonNeg {
    type Output = ExtNonNeg;

    fn add(self, rhs: Self) -> Self {
        ExtNonNeg(self.0 + rhs.0)
    }
}

impl From<ExtNonNeg> for f64 {
    fn from(v: ExtNonNeg) -> f64 {
        v.0
    }
}

impl fmt::Display for ExtNonNeg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            f.write_str("inf")
        } else {
            fmt::Display::fmt(&self.0, f)
        }
    }
}

fn check_probability(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} = {x} is not a probability")))
    }
}

/// `x * ln(x / y)` with `0 ln(0/y) = 0` and `x ln(x/0) = +inf` for `x > 0`.
fn xlogx_over_y(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if y == 0.0 {
        f64::INFINITY
    } else {
        x * (x / y).ln()
    }
}

/// Kullback-Leibler divergence between Bernoulli laws of parameters `p` and `q`.
///
/// `0 ln 0 = 0`; the value is `+inf` when `q = 0 < p` or `p < 1 = q`.
pub fn bernoulli_kl(p: f64, q: f64) -> Result<ExtNonNeg> {
    check_probability("p", p)?;
    check_probability("q", q)?;
    Ok(bernoulli_kl_unchecked(p, q))
}

pub(crate) fn bernoulli_kl_unchecked(p: f64, q: f64) -> ExtNonNeg {
    if p == q {
        return ExtNonNeg::ZERO;
    }
    let v = xlogx_over_y(p, q) + xlogx_over_y(1.0 - p, 1.0 - q);
    ExtNonNeg::from_rounded(v)
}

/// Binary entropy `h(x) = -(x ln x + (1-x) ln(1-x))`, in nats.
pub fn binary_entropy(x: f64) -> Result<f64> {
    check_probability("x", x)?;
    let term = |v: f64| if v == 0.0 { 0.0 } else { -v * v.ln() };
    Ok(term(x) + term(1.0 - x))
}

const LAMBERT_MAX_ITER: usize = 64;

/// Principal branch of the Lambert function on `[0, inf)`: the unique `v >= 0`
/// with `v e^v = u`.
///
/// Halley iteration from `max(ln(1+u) - ln ln(e+u), u/(1+u))`, followed by a
/// residual certificate `|v e^v - u| <= 1e-12 max(1, u)`.
pub fn lambert_w(u: f64) -> Result<f64> {
    if u.is_nan() || u < 0.0 {
        return Err(Error::domain(format!("lambert_w requires u >= 0, got {u}")));
    }
    if u == 0.0 {
        return Ok(0.0);
    }
    if u.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let mut w = ((1.0 + u).ln() - (std::f64::consts::E + u).ln().ln()).max(u / (1.0 + u));
    for _ in 0..LAMBERT_MAX_ITER {
        let ew = w.exp();
        let f = w * ew - u;
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        let next = (w - step).max(0.0);
        let done = (next - w).abs() <= 4.0 * f64::EPSILON * (1.0 + next);
        w = next;
        if done {
            break;
        }
    }
    // one Newton polish step from the Halley fixed point
    let ew = w.exp();
    let polished = w - (w * ew - u) / (ew * (w + 1.0));
    if polished >= 0.0 && (polished * polished.exp() - u).abs() <= (w * ew - u).abs() {
        w = polished;
    }
    let residual = (w * w.exp() - u).abs();
    if residual > 1e-12 * u.max(1.0) {
        return Err(Error::Contract(format!(
            "lambert_w({u}) failed its residual certificate: |v e^v - u| = {residual:e}"
        )));
    }
    Ok(w)
}

/// Upper bound `alpha + beta + sqrt(alpha beta)` on any `x` with
/// `(x - alpha)^2 <= beta x`.
pub fn quadratic_root_bound(alpha: f64, beta: f64) -> Result<f64> {
    if !(alpha >= 0.0 && beta >= 0.0) {
        return Err(Error::domain(format!(
            "quadratic_root_bound requires alpha, beta >= 0, got ({alpha}, {beta})"
        )));
    }
    Ok(alpha + beta + (alpha * beta).sqrt())
}
