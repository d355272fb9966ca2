//! Exact trajectory laws on micro instances.
//!
//! [`enumerate`] walks every (randomisation symbol, Bernoulli reward) path of
//! a strategy over `T` rounds and keeps the probability of each path under two
//! problems `nu` and `nu'`. From that table the chain-rule identity
//!
//! ```text
//! KL(P_nu, P_nu') = sum_a E_nu[N_a(T)] KL(nu_a, nu'_a)
//! ```
//!
//! and the inequality `sum_a E_nu[N_a(T)] KL(nu_a, nu'_a) >= kl(E_nu[Z], E_nu'[Z])`
//! can be checked to rounding error.
//!
//! The strategy's uniform draw is replaced by `R` equiprobable symbols, the
//! `s`-th one standing for the midpoint `(s + 1/2) / R`. Strategies that use
//! at most one draw per round and only compare it to thresholds on the `1/R`
//! lattice keep their exact law.

pub mod battery;
pub mod grids;
pub mod oracle;

use rand::RngCore;

use crate::divergence::{bernoulli_kl, ExtNonNeg};
use crate::error::{Error, Result};
use crate::models::{kl_div, BanditProblem, Model};
use crate::strategies::{Strategy, StrategySpec};

pub use battery::{run_battery, ReportRow, VerifyOptions};

/// Largest horizon [`enumerate`] accepts.
pub const MAX_HORIZON: usize = 12;
/// Largest randomisation alphabet [`enumerate`] accepts.
pub const MAX_ALPHABET: u32 = 4;
/// Cap on `(2R)^T`.
pub const ROW_CAP: u64 = 10_000_000;

/// Compensated (Neumaier) sum.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// A stand-in for the strategy's random stream that serves one fixed symbol.
///
/// Any second draw within the same round is recorded so the enumerator can
/// reject the strategy.
#[derive(Debug, Clone)]
pub struct SymbolStream {
    encoded: u64,
    draws: u32,
}

impl SymbolStream {
    pub fn new(symbol: u32, alphabet: u32) -> Self {
        let mid = (f64::from(symbol) + 0.5) / f64::from(alphabet);
        let encoded = ((mid * (1u64 << 53) as f64) as u64) << 11;
        SymbolStream { encoded, draws: 0 }
    }

    pub fn draws(&self) -> u32 {
        self.draws
    }
}

impl RngCore for SymbolStream {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.draws += 1;
        self.encoded
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let bytes = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}

/// One enumerated trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub log_p_nu: f64,
    pub log_p_nu_prime: f64,
    pub counts: Vec<u32>,
}

impl Row {
    pub fn p_nu(&self) -> f64 {
        self.log_p_nu.exp()
    }

    pub fn p_nu_prime(&self) -> f64 {
        self.log_p_nu_prime.exp()
    }
}

/// All trajectories of a strategy with their laws under `nu` and `nu'`.
#[derive(Debug, Clone)]
pub struct TrajectoryTable {
    pub horizon: usize,
    pub alphabet: u32,
    pub rows: Vec<Row>,
    kl_per_arm: Vec<ExtNonNeg>,
    optimal: Vec<usize>,
}

/// `[0, 1]`-valued statistics of the final counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZStat {
    /// `N_k(T) / T`.
    ArmFraction(usize),
    /// Pulls of the arms optimal under `nu`, over `T`.
    OptimalFraction,
    /// `N_a+ / (N_a+ + N_b+)` with `N+ = max(N, 1)`.
    PullRatio { arm: usize, reference: usize },
}

impl ZStat {
    pub fn label(&self) -> String {
        match self {
            ZStat::ArmFraction(k) => format!("N{}/T", k + 1),
            ZStat::OptimalFraction => "N_opt/T".into(),
            ZStat::PullRatio { arm, reference } => format!("N{}+/(N{}+ + N{}+)", arm + 1, arm + 1, reference + 1),
        }
    }

    /// Every statistic for `k` arms.
    pub fn all(k: usize) -> Vec<ZStat> {
        let mut out: Vec<ZStat> = (0..k).map(ZStat::ArmFraction).collect();
        out.push(ZStat::OptimalFraction);
        for a in 0..k {
            for b in 0..k {
                if a != b {
                    out.push(ZStat::PullRatio { arm: a, reference: b });
                }
            }
        }
        out
    }
}

impl TrajectoryTable {
    pub fn arm_count(&self) -> usize {
        self.kl_per_arm.len()
    }

    pub fn total_nu(&self) -> f64 {
        neumaier_sum(self.rows.iter().map(Row::p_nu))
    }

    pub fn total_nu_prime(&self) -> f64 {
        neumaier_sum(self.rows.iter().map(Row::p_nu_prime))
    }

    pub fn expected_count_nu(&self, a: usize) -> f64 {
        neumaier_sum(self.rows.iter().map(|r| r.p_nu() * f64::from(r.counts[a])))
    }

    pub fn expected_count_nu_prime(&self, a: usize) -> f64 {
        neumaier_sum(self.rows.iter().map(|r| r.p_nu_prime() * f64::from(r.counts[a])))
    }

    /// Value of `z` on one row; a domain error if it leaves `[0, 1]`.
    pub fn z_value(&self, z: ZStat, row: &Row) -> Result<f64> {
        let t = self.horizon as f64;
        let v = match z {
            ZStat::ArmFraction(k) => f64::from(*row.counts.get(k).ok_or_else(|| bad_arm(k))?) / t,
            ZStat::OptimalFraction => self.optimal.iter().map(|&a| f64::from(row.counts[a])).sum::<f64>() / t,
            ZStat::PullRatio { arm, reference } => {
                let a = f64::from((*row.counts.get(arm).ok_or_else(|| bad_arm(arm))?).max(1));
                let b = f64::from((*row.counts.get(reference).ok_or_else(|| bad_arm(reference))?).max(1));
                a / (a + b)
            }
        };
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::domain(format!("statistic {} = {v} leaves [0, 1]", z.label())));
        }
        Ok(v)
    }

    /// `(E_nu[Z], E_nu'[Z])`.
    pub fn expectations(&self, z: ZStat) -> Result<(f64, f64)> {
        let values = self.rows.iter().map(|r| self.z_value(z, r)).collect::<Result<Vec<_>>>()?;
        let e_nu = neumaier_sum(self.rows.iter().zip(&values).map(|(r, v)| r.p_nu() * v));
        let e_nu_prime = neumaier_sum(self.rows.iter().zip(&values).map(|(r, v)| r.p_nu_prime() * v));
        Ok((e_nu, e_nu_prime))
    }

    /// `KL(P_nu, P_nu')` between the two trajectory laws.
    pub fn trajectory_kl(&self) -> f64 {
        let mut terms = Vec::with_capacity(self.rows.len());
        for r in &self.rows {
            if r.log_p_nu == f64::NEG_INFINITY {
                continue;
            }
            if r.log_p_nu_prime == f64::NEG_INFINITY {
                return f64::INFINITY;
            }
            terms.push(r.p_nu() * (r.log_p_nu - r.log_p_nu_prime));
        }
        neumaier_sum(terms).max(0.0)
    }

    /// `sum_a E_nu[N_a(T)] KL(nu_a, nu'_a)`, with `0 * inf = 0`.
    pub fn information(&self) -> f64 {
        neumaier_sum((0..self.arm_count()).map(|a| self.kl_per_arm[a].weighted(self.expected_count_nu(a))))
    }
}

fn bad_arm(a: usize) -> Error {
    Error::precondition(format!("arm index {a} out of range"))
}

fn ln_prob(p: f64) -> f64 {
    if p > 0.0 {
        p.ln()
    } else {
        f64::NEG_INFINITY
    }
}

struct Walker<'a> {
    nu: &'a BanditProblem,
    nu_prime: &'a BanditProblem,
    horizon: usize,
    alphabet: u32,
    rows: Vec<Row>,
}

impl Walker<'_> {
    fn descend(&mut self, strategy: &dyn Strategy, depth: usize, log_nu: f64, log_nu_prime: f64) -> Result<()> {
        if depth == self.horizon {
            let counts = strategy.stats().counts().iter().map(|&n| n as u32).collect();
            self.rows.push(Row { log_p_nu: log_nu, log_p_nu_prime: log_nu_prime, counts });
            return Ok(());
        }
        let mut branches: Vec<(Box<dyn Strategy>, usize, f64)> = Vec::new();
        let mut probe = strategy.clone_box();
        let mut stream = SymbolStream::new(0, self.alphabet);
        let arm = probe.choose(&mut stream);
        match stream.draws() {
            0 => branches.push((probe, arm, 0.0)),
            1 => {
                let w = -f64::from(self.alphabet).ln();
                branches.push((probe, arm, w));
                for symbol in 1..self.alphabet {
                    let mut s = strategy.clone_box();
                    let mut stream = SymbolStream::new(symbol, self.alphabet);
                    let arm = s.choose(&mut stream);
                    if stream.draws() != 1 {
                        return Err(not_enumerable(strategy, stream.draws()));
                    }
                    branches.push((s, arm, w));
                }
            }
            n => return Err(not_enumerable(strategy, n)),
        }
        for (s, arm, w) in branches {
            let p = self.nu.means()[arm];
            let q = self.nu_prime.means()[arm];
            for (reward, pn, pq) in [(1.0, p, q), (0.0, 1.0 - p, 1.0 - q)] {
                if pn == 0.0 && pq == 0.0 {
                    continue;
                }
                let mut next = s.clone_box();
                next.update(arm, reward)?;
                self.descend(next.as_ref(), depth + 1, log_nu + w + ln_prob(pn), log_nu_prime + w + ln_prob(pq))?;
            }
        }
        Ok(())
    }
}

fn not_enumerable(strategy: &dyn Strategy, draws: u32) -> Error {
    Error::NotEnumerable(format!(
        "{} used {draws} uniform draws in one round; at most one is supported",
        strategy.name()
    ))
}

/// Every trajectory of `spec` over `horizon` rounds on Bernoulli problems
/// `nu` and `nu'` (same arm count), with randomisation alphabet `alphabet`.
pub fn enumerate(
    nu: &BanditProblem,
    nu_prime: &BanditProblem,
    spec: &StrategySpec,
    horizon: usize,
    alphabet: u32,
) -> Result<TrajectoryTable> {
    if nu.model() != &Model::Bernoulli || nu_prime.model() != &Model::Bernoulli {
        return Err(Error::ModelMismatch("enumeration needs Bernoulli arms".into()));
    }
    if nu.arm_count() != nu_prime.arm_count() {
        return Err(Error::precondition("nu and nu' must have the same number of arms"));
    }
    if !(1..=MAX_HORIZON).contains(&horizon) {
        return Err(Error::precondition(format!("horizon {horizon} outside 1..={MAX_HORIZON}")));
    }
    if !(1..=MAX_ALPHABET).contains(&alphabet) {
        return Err(Error::precondition(format!("alphabet size {alphabet} outside 1..={MAX_ALPHABET}")));
    }
    let rows = u128::from(2 * alphabet).pow(horizon as u32);
    if rows > u128::from(ROW_CAP) {
        return Err(Error::TableTooLarge { rows, cap: ROW_CAP });
    }
    let kl_per_arm = (0..nu.arm_count())
        .map(|a| kl_div(nu.arm(a), nu_prime.arm(a)))
        .collect::<Result<Vec<_>>>()?;
    let strategy = spec.build(nu)?;
    let mut walker = Walker { nu, nu_prime, horizon, alphabet, rows: Vec::new() };
    walker.descend(strategy.as_ref(), 0, 0.0, 0.0)?;
    Ok(TrajectoryTable { horizon, alphabet, rows: walker.rows, kl_per_arm, optimal: nu.optimal_arms() })
}

/// `|KL(P_nu, P_nu') - sum_a E_nu[N_a] KL(nu_a, nu'_a)|`.
///
/// Both sides infinite gives 0; exactly one infinite side is a contract violation.
pub fn chain_rule_residual(table: &TrajectoryTable) -> Result<f64> {
    let lhs = table.trajectory_kl();
    let rhs = table.information();
    match (lhs.is_infinite(), rhs.is_infinite()) {
        (true, true) => Ok(0.0),
        (false, false) => Ok((lhs - rhs).abs()),
        _ => Err(Error::Contract(format!(
            "chain rule: trajectory KL = {lhs} but the per-arm sum = {rhs}"
        ))),
    }
}

/// Expectations within rounding of 0 or 1 are put exactly there, so a
/// statistic that is constant at an end point is not mistaken for a singular one.
fn snap_unit(e: f64) -> f64 {
    const SNAP: f64 = 1e-12;
    if e < SNAP {
        0.0
    } else if e > 1.0 - SNAP {
        1.0
    } else {
        e
    }
}

/// `sum_a E_nu[N_a] KL(nu_a, nu'_a) - kl(E_nu[Z], E_nu'[Z])`.
pub fn fundamental_slack(table: &TrajectoryTable, z: ZStat) -> Result<f64> {
    let (e_nu, e_nu_prime) = table.expectations(z)?;
    let rhs = bernoulli_kl(snap_unit(e_nu), snap_unit(e_nu_prime))?;
    let lhs = table.information();
    Ok(if rhs.is_infinite() {
        if lhs.is_infinite() {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    } else {
        lhs - rhs.value()
    })
}

/// Largest outcome set accepted by [`data_processing_check`].
pub const MAX_OUTCOMES: usize = 64;

/// `KL(p1, p2) - kl(E_1[z], E_2[z])` for laws on a common finite outcome set.
pub fn data_processing_check(p1: &[f64], p2: &[f64], z: &[f64]) -> Result<f64> {
    if p1.len() != p2.len() || p1.len() != z.len() || p1.is_empty() || p1.len() > MAX_OUTCOMES {
        return Err(Error::precondition(format!(
            "need equally long p1, p2, z with 1..={MAX_OUTCOMES} outcomes"
        )));
    }
    if z.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::domain("z must be [0, 1]-valued"));
    }
    let mut terms = Vec::with_capacity(p1.len());
    let mut infinite = false;
    for (&a, &b) in p1.iter().zip(p2) {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            infinite = true;
            break;
        }
        terms.push(a * (a / b).ln());
    }
    let e1 = snap_unit(neumaier_sum(p1.iter().zip(z).map(|(p, v)| p * v)));
    let e2 = snap_unit(neumaier_sum(p2.iter().zip(z).map(|(p, v)| p * v)));
    let rhs = bernoulli_kl(e1, e2)?;
    if infinite {
        return Ok(f64::INFINITY);
    }
    let lhs = neumaier_sum(terms);
    Ok(if rhs.is_infinite() { f64::NEG_INFINITY } else { lhs - rhs.value() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pair() -> (BanditProblem, BanditProblem) {
        (BanditProblem::bernoulli(&[0.5, 0.3]).unwrap(), BanditProblem::bernoulli(&[0.5, 0.6]).unwrap())
    }

    #[test]
    fn symbol_stream_hits_midpoints() {
        let mut s = SymbolStream::new(1, 4);
        let u = crate::strategies::unit_draw(&mut s);
        assert_eq!(u, 0.375);
        assert_eq!(s.draws(), 1);
    }

    #[test]
    fn single_pull_table() {
        let nu = BanditProblem::bernoulli(&[0.3, 0.6]).unwrap();
        let t = enumerate(&nu, &nu, &StrategySpec::FixedArm { arm: 0 }, 1, 1).unwrap();
        assert_eq!(t.rows.len(), 2);
        let mut probs: Vec<f64> = t.rows.iter().map(Row::p_nu).collect();
        probs.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(probs[0], 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(probs[1], 0.7, epsilon = 1e-15);
        for r in &t.rows {
            assert_eq!(r.p_nu(), r.p_nu_prime());
        }
    }

    #[test]
    fn single_pull_chain_rule_is_one_kl() {
        let nu = BanditProblem::bernoulli(&[0.3, 0.6]).unwrap();
        let nu_p = BanditProblem::bernoulli(&[0.45, 0.6]).unwrap();
        let t = enumerate(&nu, &nu_p, &StrategySpec::FixedArm { arm: 0 }, 1, 1).unwrap();
        let kl = bernoulli_kl(0.3, 0.45).unwrap().value();
        assert_abs_diff_eq!(t.trajectory_kl(), kl, epsilon = 1e-15);
        assert_abs_diff_eq!(t.information(), kl, epsilon = 1e-15);
    }

    #[test]
    fn greedy_micro_instance() {
        let (nu, nu_p) = pair();
        let t = enumerate(&nu, &nu_p, &StrategySpec::Greedy, 3, 1).unwrap();
        assert_abs_diff_eq!(t.total_nu(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.total_nu_prime(), 1.0, epsilon = 1e-12);
        assert!(t.rows.iter().all(|r| r.counts.iter().sum::<u32>() == 3));
        assert!(chain_rule_residual(&t).unwrap() <= 1e-10);
        for z in ZStat::all(2) {
            assert!(fundamental_slack(&t, z).unwrap() >= -1e-10, "{}", z.label());
        }
    }

    #[test]
    fn identical_problems_have_zero_slack() {
        let nu = BanditProblem::bernoulli(&[0.5, 0.3]).unwrap();
        let t = enumerate(&nu, &nu, &StrategySpec::CoinGreedy, 4, 2).unwrap();
        assert_eq!(chain_rule_residual(&t).unwrap(), 0.0);
        assert_eq!(fundamental_slack(&t, ZStat::ArmFraction(1)).unwrap(), 0.0);
    }

    #[test]
    fn randomised_instance() {
        let (nu, nu_p) = pair();
        let t = enumerate(&nu, &nu_p, &StrategySpec::CoinGreedy, 5, 2).unwrap();
        assert_abs_diff_eq!(t.total_nu(), 1.0, epsilon = 1e-12);
        assert!(chain_rule_residual(&t).unwrap() <= 1e-10);
        assert!(fundamental_slack(&t, ZStat::ArmFraction(1)).unwrap() >= -1e-10);
    }

    #[test]
    fn rejects_unenumerable_inputs() {
        let (nu, nu_p) = pair();
        assert!(matches!(
            enumerate(&nu, &nu_p, &StrategySpec::Thompson, 2, 2),
            Err(Error::NotEnumerable(_))
        ));
        assert!(matches!(
            enumerate(&nu, &nu_p, &StrategySpec::Uniform, 12, 4),
            Err(Error::TableTooLarge { .. })
        ));
        assert!(enumerate(&nu, &nu_p, &StrategySpec::Uniform, 13, 1).is_err());
        let gauss = BanditProblem::new(
            Model::Gaussian { variance: 1.0 },
            vec![
                crate::models::Distribution::gaussian(0.0, 1.0).unwrap(),
                crate::models::Distribution::gaussian(1.0, 1.0).unwrap(),
            ],
        )
        .unwrap();
        assert!(enumerate(&gauss, &gauss, &StrategySpec::Uniform, 2, 1).is_err());
    }

    #[test]
    fn constant_statistic_has_full_slack() {
        let (nu, nu_p) = pair();
        let t = enumerate(&nu, &nu_p, &StrategySpec::FixedArm { arm: 1 }, 3, 1).unwrap();
        let slack = fundamental_slack(&t, ZStat::ArmFraction(1)).unwrap();
        assert_abs_diff_eq!(slack, t.information(), epsilon = 1e-15);
    }

    #[test]
    fn data_processing_examples() {
        let p1 = [0.2, 0.3, 0.5];
        let p2 = [0.4, 0.4, 0.2];
        let event = [1.0, 0.0, 0.0];
        assert!(data_processing_check(&p1, &p2, &event).unwrap() >= 0.0);
        assert_eq!(data_processing_check(&p1, &p1, &[0.3, 0.9, 0.1]).unwrap(), 0.0);
        assert!(data_processing_check(&p1, &p2[..2], &event).is_err());
        assert!(data_processing_check(&p1, &[0.5, 0.5, 0.0], &event).unwrap().is_infinite());
    }

    #[test]
    fn neumaier_recovers_cancellation() {
        assert_eq!(neumaier_sum([1.0, 1e100, 1.0, -1e100]), 2.0);
    }
}
