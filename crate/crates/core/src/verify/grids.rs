//! Grid sweeps of the scalar inequalities the bounds are built from.
//!
//! The `kl` used by the sweeps is a parameter so that a deliberately broken
//! kernel can be fed in as a negative control.

use crate::divergence::{bernoulli_kl_unchecked, binary_entropy, lambert_w};

/// A Bernoulli `kl` implementation under test.
pub type KlFn = fn(f64, f64) -> f64;

/// The library kernel.
pub fn library_kl(p: f64, q: f64) -> f64 {
    bernoulli_kl_unchecked(p, q).value()
}

/// Broken kernel for negative controls: the second term enters with a minus sign.
pub fn kl_with_flipped_second_term(p: f64, q: f64) -> f64 {
    let term = |x: f64, y: f64| if x == 0.0 { 0.0 } else if y == 0.0 { f64::INFINITY } else { x * (x / y).ln() };
    term(p, q) - term(1.0 - p, 1.0 - q)
}

/// Outcome of one sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct GridReport {
    pub name: &'static str,
    pub points: usize,
    pub violations: usize,
    /// Smallest `lhs - rhs` seen (negative means violated beyond rounding).
    pub worst_slack: f64,
}

/// Absolute slack allowed for rounding in the sweeps.
pub const GRID_TOL: f64 = 1e-12;

struct Sweep {
    report: GridReport,
}

impl Sweep {
    fn new(name: &'static str) -> Self {
        Sweep { report: GridReport { name, points: 0, violations: 0, worst_slack: f64::INFINITY } }
    }

    /// Records `big >= small` up to [`GRID_TOL`] (scaled for large magnitudes).
    fn at_least(&mut self, big: f64, small: f64) {
        self.report.points += 1;
        let slack = if big == f64::INFINITY { f64::INFINITY } else { big - small };
        let tol = GRID_TOL * small.abs().max(1.0);
        if slack.is_nan() || slack < -tol {
            self.report.violations += 1;
        }
        if slack.is_nan() {
            self.report.worst_slack = f64::NEG_INFINITY;
        } else {
            self.report.worst_slack = self.report.worst_slack.min(slack);
        }
    }

    fn done(self) -> GridReport {
        self.report
    }
}

fn unit_grid(n: usize) -> impl Iterator<Item = f64> + Clone {
    (0..n).map(move |i| i as f64 / (n - 1) as f64)
}

/// `kl(p, q) >= 2 (p - q)^2` on a 201 x 201 grid of `[0, 1]^2`.
pub fn pinsker_classical(kl: KlFn) -> GridReport {
    let mut s = Sweep::new("pinsker_classical");
    for p in unit_grid(201) {
        for q in unit_grid(201) {
            s.at_least(kl(p, q), 2.0 * (p - q) * (p - q));
        }
    }
    s.done()
}

/// `kl(p, q) >= (p - q)^2 / (2q)` and `>= (p - q)^2 / (2 max_{[p,q]} x(1-x))`
/// for `p < q < 1` on the same grid.
pub fn pinsker_local(kl: KlFn) -> GridReport {
    let mut s = Sweep::new("pinsker_local");
    for p in unit_grid(201) {
        for q in unit_grid(201).filter(|&q| p < q && q < 1.0) {
            let v = kl(p, q);
            let d2 = (p - q) * (p - q);
            s.at_least(v, d2 / (2.0 * q));
            let var = if p <= 0.5 && 0.5 <= q {
                0.25
            } else if q < 0.5 {
                q * (1.0 - q)
            } else {
                p * (1.0 - p)
            };
            s.at_least(v, d2 / (2.0 * var));
        }
    }
    s.done()
}

/// `kl(p, q) >= p ln(1/q) + (1 - p) ln(1/(1 - q)) - ln 2` for `q` in `(0, 1)`.
pub fn kl_linear_lower_bound(kl: KlFn) -> GridReport {
    let mut s = Sweep::new("kl_linear_lower_bound");
    for p in unit_grid(201) {
        for q in unit_grid(201).filter(|&q| q > 0.0 && q < 1.0) {
            let rhs = p * (1.0 / q).ln() + (1.0 - p) * (1.0 / (1.0 - q)).ln() - std::f64::consts::LN_2;
            s.at_least(kl(p, q), rhs);
        }
    }
    s.done()
}

/// `q -> kl(p, q)` is nonincreasing on `[0, p]` and nondecreasing on `[p, 1]`.
pub fn kl_monotone_in_q(kl: KlFn) -> GridReport {
    let mut s = Sweep::new("kl_monotone_in_q");
    let grid: Vec<f64> = unit_grid(201).collect();
    for &p in &grid {
        for w in grid.windows(2) {
            let (q0, q1) = (w[0], w[1]);
            if q1 <= p {
                s.at_least(kl(p, q0), kl(p, q1));
            } else if q0 >= p {
                s.at_least(kl(p, q1), kl(p, q0));
            }
        }
    }
    s.done()
}

/// `h(x) <= x ln(4/x)` on 1000 points of `(0, 1/2]`.
pub fn entropy_bound() -> GridReport {
    let mut s = Sweep::new("entropy_bound");
    for i in 1..=1000 {
        let x = 0.5 * i as f64 / 1000.0;
        s.at_least(x * (4.0 / x).ln(), binary_entropy(x).expect("x is a probability"));
    }
    s.done()
}

/// `(1 - 2x) ln((1 - x)/x) >= ln(1/(2.4 x))` on 1000 interior points of `(0, 1)`.
pub fn function_study() -> GridReport {
    let mut s = Sweep::new("function_study");
    for i in 1..=1000 {
        let x = i as f64 / 1001.0;
        s.at_least((1.0 - 2.0 * x) * ((1.0 - x) / x).ln(), (1.0 / (2.4 * x)).ln());
    }
    s.done()
}

/// `ln u - ln ln u <= W(u) <= ln u` for `u` on a log grid of `[e, 1e12]`.
pub fn lambert_sandwich() -> GridReport {
    let mut s = Sweep::new("lambert_sandwich");
    let lo = 1.0f64;
    let hi = 1e12f64.ln();
    for i in 0..=400 {
        let u = (lo + (hi - lo) * i as f64 / 400.0).exp();
        let w = lambert_w(u).expect("u >= 0");
        s.at_least(w, u.ln() - u.ln().ln());
        s.at_least(u.ln(), w);
    }
    s.done()
}

/// Every sweep, with `kl` as the Bernoulli kernel.
pub fn all_grids(kl: KlFn) -> Vec<GridReport> {
    vec![
        pinsker_classical(kl),
        pinsker_local(kl),
        kl_linear_lower_bound(kl),
        kl_monotone_in_q(kl),
        entropy_bound(),
        function_study(),
        lambert_sandwich(),
    ]
}
