//! Brute-force primal search for `K_inf` on finite supports.
//!
//! Candidates are `(1 - alpha) sum_i v_i delta_{x_i} + alpha delta_y`: the
//! reweighting `v` runs over a `1e-3` simplex grid, `y` over the support and
//! `x + (M - x) k / 10` for `k = 1..=10`, and `alpha` in `[0, 1)` moves the
//! mean exactly to `x`. Each candidate is feasible (in the limit), so the
//! search returns an upper bound on `K_inf`, tight to about `1e-4` when the
//! support has at most three points.

use crate::error::{Error, Result};

const WEIGHT_STEPS: u32 = 1000;

fn candidate_kl(points: &[f64], weights: &[f64], v: &[f64], x: f64, y: f64) -> f64 {
    let m_v: f64 = points.iter().zip(v).map(|(p, w)| p * w).sum();
    let alpha = if m_v == x {
        0.0
    } else {
        (x - m_v) / (y - m_v)
    };
    if !(0.0..1.0).contains(&alpha) {
        return f64::INFINITY;
    }
    let mut total = 0.0;
    for i in 0..points.len() {
        let mut q = (1.0 - alpha) * v[i];
        if points[i] == y {
            q += alpha;
        }
        if weights[i] > 0.0 {
            if q <= 0.0 {
                return f64::INFINITY;
            }
            total += weights[i] * (weights[i] / q).ln();
        }
    }
    total
}

/// Primal grid estimate of `K_inf` for the law `(points, weights)` on
/// `[0, ceiling]` at level `mean < x < ceiling`. Supports of 1 to 3 points.
pub fn k_inf_primal_grid(points: &[f64], weights: &[f64], x: f64, ceiling: f64) -> Result<f64> {
    if points.is_empty() || points.len() > 3 || points.len() != weights.len() {
        return Err(Error::precondition("the primal oracle handles 1 to 3 support points"));
    }
    if x.is_nan() || x >= ceiling {
        return Err(Error::domain(format!("level {x} must lie below the ceiling {ceiling}")));
    }
    let mut ys: Vec<f64> = (1..=10).map(|k| x + (ceiling - x) * f64::from(k) / 10.0).collect();
    ys.extend_from_slice(points);
    let step = 1.0 / f64::from(WEIGHT_STEPS);
    let mut best = f64::INFINITY;
    let mut visit = |v: &[f64]| {
        for &y in &ys {
            best = best.min(candidate_kl(points, weights, v, x, y));
        }
    };
    match points.len() {
        1 => visit(&[1.0]),
        2 => {
            for i in 0..=WEIGHT_STEPS {
                let a = f64::from(i) * step;
                visit(&[a, 1.0 - a]);
            }
        }
        _ => {
            for i in 0..=WEIGHT_STEPS {
                for j in 0..=(WEIGHT_STEPS - i) {
                    let a = f64::from(i) * step;
                    let b = f64::from(j) * step;
                    visit(&[a, b, (1.0 - a - b).max(0.0)]);
                }
            }
        }
    }
    Ok(best)
}
