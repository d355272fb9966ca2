//! `K_inf` for laws with finite support in `[0, M]`.
//!
//! The primal problem ranges over all laws on `[0, M]`; the computable form is
//! the concave one-dimensional dual
//!
//! ```text
//! K_inf(d, x) = max_{0 <= l <= 1/(M - x)}  sum_i w_i ln(1 - l (x_i - x))
//! ```
//!
//! maximised here by golden-section search.

const BRACKET_WIDTH: f64 = 1e-10;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Dual objective `sum_i w_i ln(1 - lambda (x_i - x))`; `-inf` once a factor hits 0.
pub fn dual_objective(points: &[f64], weights: &[f64], x: f64, lambda: f64) -> f64 {
    let mut total = 0.0;
    for (&xi, &wi) in points.iter().zip(weights) {
        let factor = 1.0 - lambda * (xi - x);
        if factor <= 0.0 {
            return f64::NEG_INFINITY;
        }
        total += wi * factor.ln();
    }
    total
}

/// Golden-section maximisation of a concave function on `[lo, hi]`,
/// returning the best value seen (endpoints included).
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, width: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > width {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    [(lo, f(lo)), (hi, f(hi)), (mid, f(mid)), (c, fc), (d, fd)]
        .into_iter()
        .fold((lo, f64::NEG_INFINITY), |best, cand| if cand.1 > best.1 { cand } else { best })
}

/// `K_inf` of the finite law `(points, weights)` at level `x`, for `mean < x < ceiling`.
pub fn bounded_support_dual(points: &[f64], weights: &[f64], x: f64, ceiling: f64) -> f64 {
    let hi = 1.0 / (ceiling - x);
    let width = BRACKET_WIDTH * hi.max(1.0);
    let (_, value) = golden_section_max(|l| dual_objective(points, weights, x, l), 0.0, hi, width);
    value.max(0.0)
}
