//! Bandit algorithms behind one sequential decision contract.
//!
//! Every strategy sees only its own pull counts, the rewards it was fed and
//! the uniform draws it asks for. Draws come from a caller-owned
//! [`RngCore`]; a strategy pulls from it only when a decision needs one, so a
//! replay with the same stream is bit-identical.
//!
//! Arms are 0-based in the library. CSV outputs add 1.

use rand::RngCore;
use rand_distr::{Beta, Distribution as _};
use serde::{Deserialize, Serialize};

use crate::divergence::bernoulli_kl_unchecked;
use crate::error::{Error, Result};
use crate::models::BanditProblem;

/// A uniform number in `[0, 1)` built from the top 53 bits of one `u64` draw.
pub fn unit_draw(rng: &mut dyn RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Maps a uniform draw to one of `n` slots.
fn pick(u: f64, n: usize) -> usize {
    ((u * n as f64) as usize).min(n - 1)
}

/// Per-arm pull counts and running reward means.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmStats {
    counts: Vec<u64>,
    sums: Vec<f64>,
    means: Vec<f64>,
}

impl ArmStats {
    pub fn new(k: usize) -> Self {
        ArmStats { counts: vec![0; k], sums: vec![0.0; k], means: vec![0.0; k] }
    }

    pub fn arm_count(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, a: usize) -> u64 {
        self.counts[a]
    }

    pub fn reward_sum(&self, a: usize) -> f64 {
        self.sums[a]
    }

    /// Empirical mean of arm `a`; `None` before its first pull.
    pub fn mean(&self, a: usize) -> Option<f64> {
        (self.counts[a] > 0).then(|| self.means[a])
    }

    /// Number of rounds played so far.
    pub fn rounds(&self) -> u64 {
        self.counts.iter().sum()
    }

    fn record(&mut self, a: usize, reward: f64) {
        self.counts[a] += 1;
        self.sums[a] += reward;
        self.means[a] += (reward - self.means[a]) / self.counts[a] as f64;
    }

    /// First arm never pulled, in index order.
    fn first_unpulled(&self) -> Option<usize> {
        self.counts.iter().position(|&n| n == 0)
    }

    /// A uniformly chosen arm among those never pulled, if any.
    fn any_unpulled(&self, rng: &mut dyn RngCore) -> Option<usize> {
        let fresh: Vec<usize> = (0..self.counts.len()).filter(|&a| self.counts[a] == 0).collect();
        match fresh.len() {
            0 => None,
            1 => Some(fresh[0]),
            n => Some(fresh[pick(unit_draw(rng), n)]),
        }
    }
}

/// The sequential decision contract shared by every algorithm.
pub trait Strategy: Send + Sync {
    fn name(&self) -> &'static str;

    fn stats(&self) -> &ArmStats;

    /// Picks the arm for round `t = 1 + rounds played`.
    fn choose(&mut self, rng: &mut dyn RngCore) -> usize;

    /// Feeds back the reward of the arm returned by the last `choose`.
    fn update(&mut self, arm: usize, reward: f64) -> Result<()>;

    fn clone_box(&self) -> Box<dyn Strategy>;
}

impl Clone for Box<dyn Strategy> {
    fn clone(&self) -> Self {
        self.clone_box()
    }
}

/// Bookkeeping shared by all strategies: stats plus the pending arm.
#[derive(Debug, Clone)]
struct Core {
    stats: ArmStats,
    pending: Option<usize>,
}

impl Core {
    fn new(k: usize) -> Self {
        Core { stats: ArmStats::new(k), pending: None }
    }

    fn chose(&mut self, a: usize) -> usize {
        self.pending = Some(a);
        a
    }

    fn update(&mut self, arm: usize, reward: f64) -> Result<()> {
        match self.pending.take() {
            Some(p) if p == arm => {
                self.stats.record(arm, reward);
                Ok(())
            }
            other => {
                self.pending = other;
                Err(Error::Contract(format!(
                    "update for arm {arm} but the last chosen arm was {other:?}"
                )))
            }
        }
    }
}

/// Index of the largest score. Exact ties are split uniformly with one draw,
/// so relabelling arms relabels the pull-count law.
fn argmax_fair(scores: &[f64], rng: &mut dyn RngCore) -> usize {
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ties: Vec<usize> = (0..scores.len()).filter(|&a| scores[a] == best).collect();
    if ties.len() == 1 {
        ties[0]
    } else {
        ties[pick(unit_draw(rng), ties.len())]
    }
}

macro_rules! strategy_boilerplate {
    ($name:literal) => {
        fn name(&self) -> &'static str {
            $name
        }

        fn stats(&self) -> &ArmStats {
            &self.core.stats
        }

        fn update(&mut self, arm: usize, reward: f64) -> Result<()> {
            self.core.update(arm, reward)
        }

        fn clone_box(&self) -> Box<dyn Strategy> {
            Box::new(self.clone())
        }
    };
}

/// Pulls an arm uniformly at random each round (one draw per round).
#[derive(Debug, Clone)]
pub struct Uniform {
    core: Core,
}

impl Uniform {
    pub fn new(k: usize) -> Self {
        Uniform { core: Core::new(k) }
    }
}

impl Strategy for Uniform {
    strategy_boilerplate!("uniform");

    fn choose(&mut self, rng: &mut dyn RngCore) -> usize {
        let k = self.core.stats.arm_count();
        self.core.chose(pick(unit_draw(rng), k))
    }
}

/// UCB with index `mean + sqrt(2 ln t / N_a)` after one pull of each arm in
/// random order.
#[derive(Debug, Clone)]
pub struct Ucb {
    core: Core,
}

impl Ucb {
    pub fn new(k: usize) -> Self {
        Ucb { core: Core::new(k) }
    }
}

impl Strategy for Ucb {
    strategy_boilerplate!("ucb");

    fn choose(&mut self, rng: &mut dyn RngCore) -> usize {
        let s = &self.core.stats;
        if let Some(a) = s.any_unpulled(rng) {
            return self.core.chose(a);
        }
        let ln_t = ((s.rounds() + 1) as f64).ln();
        let scores: Vec<f64> = (0..s.arm_count())
            .map(|a| s.means[a] + (2.0 * ln_t / s.counts[a] as f64).sqrt())
            .collect();
        let a = argmax_fair(&scores, rng);
        self.core.chose(a)
    }
}

const KL_UCB_TOL: f64 = 1e-9;

/// Largest `q` in `[mean, ceiling]` with `n kl(mean/M, q/M) <= budget`.
pub fn kl_ucb_index(mean: f64, n: u64, budget: f64, ceiling: f64) -> f64 {
    let p = (mean / ceiling).clamp(0.0, 1.0);
    let level = budget / n as f64;
    if bernoulli_kl_unchecked(p, 1.0).value() <= level {
        return ceiling;
    }
    let (mut lo, mut hi) = (p, 1.0);
    while hi - lo > KL_UCB_TOL {
        let mid = 0.5 * (lo + hi);
        if bernoulli_kl_unchecked(p, mid).value() <= level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo * ceiling
}

/// KL-UCB for rewards in `[0, ceiling]`.
#[derive(Debug, Clone)]
pub struct KlUcb {
    core: Core,
    ceiling: f64,
}

impl KlUcb {
    pub fn new(k: usize, ceiling: f64) -> Self {
        KlUcb { core: Core::new(k), ceiling }
    }
}

impl Strategy for KlUcb {
    strategy_boilerplate!("kl_ucb");

    fn choose(&mut self, rng: &mut dyn RngCore) -> usize {
        let s = &self.core.stats;
        if let Some(a) = s.any_unpulled(rng) {
            return self.core.chose(a);
        }
        let ln_t = ((s.rounds() + 1) as f64).ln();
        let scores: Vec<f64> = (0..s.arm_count())
            .map(|a| kl_ucb_index(s.means[a], s.counts[a], ln_t, self.ceiling))
            .collect();
        let a = argmax_fair(&scores, rng);
        self.core.chose(a)
    }
}

/// Thompson Sampling with a Beta(1, 1) prior per arm.
///
/// Rewards in `[0, 1]` enter the posterior as fractional successes.
/// Uses the stream for the `K` posterior samples each round; ties go to the
/// lowest index.
#[derive(Debug, Clone)]
pub struct Thompson {
    core: Core,
}

impl Thompson {
    pub fn new(k: usize) -> Self {
        Thompson { core: Core::new(k) }
    }
}

impl Strategy for Thompson {
    strategy_boilerplate!("thompson");

    fn choose(&mut self, mut rng: &mut dyn RngCore) -> usize {
        let s = &self.core.stats;
        let mut best = (0, f64::NEG_INFINITY);
        for a in 0..s.arm_count() {
            let alpha = 1.0 + s.sums[a];
            let beta = 1.0 + s.counts[a] as f64 - s.sums[a];
            let theta = Beta::new(alpha, beta).expect("posterior parameters are positive").sample(&mut rng);
            if theta > best.1 {
                best = (a, theta);
            }
        }
        self.core.chose(best.0)
    }
}

/// Follow-the-leader after one pull of each arm in random order.
#[derive(Debug, Clone)]
pub struct Greedy {
    core: Core,
}

impl Greedy {
    pub fn new(k: usize) -> Self {
        Greedy { core: Core::new(k) }
    }
}

impl Strategy for Greedy {
    strategy_boilerplate!("greedy");

    fn choose(&mut self, rng: &mut dyn RngCore) -> usize {
        let s = &self.core.stats;
        if let Some(a) = s.any_unpulled(rng) {
            return self.core.chose(a);
        }
        let a = argmax_fair(&s.means, rng);
        self.core.chose(a)
    }
}

/// Always pulls the same arm.
#[derive(Debug, Clone)]
pub struct FixedArm {
    core: Core,
    arm: usize,
}

impl FixedArm {
    pub fn new(k: usize, arm: usize) -> Self {
        FixedArm { core: Core::new(k), arm }
    }
}

impl Strategy for FixedArm {
    strategy_boilerplate!("fixed_arm");

    fn choose(&mut self, _rng: &mut dyn RngCore) -> usize {
        self.core.chose(self.arm)
    }
}

/// Each round flips a fair coin: heads plays the empirical leader, tails the
/// least-pulled arm. Exactly one draw per round: `u < 1/2` is heads, and the
/// position of `u` inside its half splits ties uniformly.
#[derive(Debug, Clone)]
pub struct CoinGreedy {
    core: Core,
}

impl CoinGreedy {
    pub fn new(k: usize) -> Self {
        CoinGreedy { core: Core::new(k) }
    }
}

impl Strategy for CoinGreedy {
    strategy_boilerplate!("coin_greedy");

    fn choose(&mut self, rng: &mut dyn RngCore) -> usize {
        let s = &self.core.stats;
        let k = s.arm_count();
        let u = unit_draw(rng);
        let fewest = s.counts.iter().copied().min().unwrap_or(0);
        let least_pulled: Vec<usize> = (0..k).filter(|&a| s.counts[a] == fewest).collect();
        let a = if u < 0.5 {
            let best = (0..k)
                .filter(|&a| s.counts[a] > 0)
                .map(|a| s.means[a])
                .fold(f64::NEG_INFINITY, f64::max);
            let leaders: Vec<usize> = (0..k).filter(|&a| s.counts[a] > 0 && s.means[a] == best).collect();
            let pool = if leaders.is_empty() { &least_pulled } else { &leaders };
            pool[pick(2.0 * u, pool.len())]
        } else {
            least_pulled[pick(2.0 * u - 1.0, least_pulled.len())]
        };
        self.core.chose(a)
    }
}

/// The bounded-regret algorithm that knows the optimal mean `mu*`.
///
/// Rounds `1..=K` pull each arm once. Afterwards the candidates are the arms
/// whose empirical mean beats `mu* - sqrt(4 ln N_a / N_a)`; one of them is
/// played uniformly at random. With no candidate, arms `1..K` are queued and
/// played in index order before candidates are looked at again.
#[derive(Debug, Clone)]
pub struct KnownMuStar {
    core: Core,
    mu_star: f64,
    queue: Vec<usize>,
}

impl KnownMuStar {
    pub fn new(k: usize, mu_star: f64) -> Self {
        KnownMuStar { core: Core::new(k), mu_star, queue: Vec::new() }
    }

    pub fn mu_star(&self) -> f64 {
        self.mu_star
    }

    /// Arms still waiting in the forced round-robin, next one last.
    pub fn forced_queue(&self) -> &[usize] {
        &self.queue
    }

    pub fn candidates(&self) -> Result<Vec<usize>> {
        known_mu_star_candidates(&self.core.stats, self.mu_star)
    }
}

/// `{a : mean_a - mu* > -sqrt(4 ln N_a / N_a)}`; every arm must have been pulled.
pub fn known_mu_star_candidates(stats: &ArmStats, mu_star: f64) -> Result<Vec<usize>> {
    if let Some(a) = stats.first_unpulled() {
        return Err(Error::precondition(format!("arm {a} has not been pulled yet")));
    }
    Ok((0..stats.arm_count())
        .filter(|&a| {
            let n = stats.counts[a] as f64;
            stats.means[a] - mu_star > -(4.0 * n.ln() / n).sqrt()
        })
        .collect())
}

impl Strategy for KnownMuStar {
    strategy_boilerplate!("known_mu_star");

    fn choose(&mut self, rng: &mut dyn RngCore) -> usize {
        if let Some(a) = self.core.stats.first_unpulled() {
            return self.core.chose(a);
        }
        if let Some(a) = self.queue.pop() {
            return self.core.chose(a);
        }
        let candidates = known_mu_star_candidates(&self.core.stats, self.mu_star).expect("all arms pulled");
        if candidates.is_empty() {
            let k = self.core.stats.arm_count();
            self.queue = (1..k).rev().collect();
            return self.core.chose(0);
        }
        let a = candidates[pick(unit_draw(rng), candidates.len())];
        self.core.chose(a)
    }
}

/// A strategy id plus its parameters, as written in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case", deny_unknown_fields)]
pub enum StrategySpec {
    Uniform,
    Ucb,
    KlUcb {
        #[serde(default = "default_ceiling")]
        ceiling: f64,
    },
    Thompson,
    /// `mu_star` defaults to the problem's optimal mean when omitted.
    KnownMuStar {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mu_star: Option<f64>,
    },
    Greedy,
    /// 0-based arm index.
    FixedArm { arm: usize },
    CoinGreedy,
}

fn default_ceiling() -> f64 {
    1.0
}

impl StrategySpec {
    pub fn id(&self) -> &'static str {
        match self {
            StrategySpec::Uniform => "uniform",
            StrategySpec::Ucb => "ucb",
            StrategySpec::KlUcb { .. } => "kl_ucb",
            StrategySpec::Thompson => "thompson",
            StrategySpec::KnownMuStar { .. } => "known_mu_star",
            StrategySpec::Greedy => "greedy",
            StrategySpec::FixedArm { .. } => "fixed_arm",
            StrategySpec::CoinGreedy => "coin_greedy",
        }
    }

    /// Rejects strategies whose assumptions the problem breaks (reward
    /// range for Thompson and KL-UCB, arm index for `fixed_arm`).
    pub fn check_compatible(&self, nu: &BanditProblem) -> Result<()> {
        let in_range = |hi: f64| {
            nu.arms().iter().all(|d| match d.finite_support() {
                Some((pts, _)) => pts.iter().all(|x| (0.0..=hi).contains(x)),
                None => false,
            })
        };
        match self {
            StrategySpec::Thompson if !in_range(1.0) => Err(Error::ModelMismatch(
                "thompson needs every arm supported in [0, 1]".into(),
            )),
            StrategySpec::KlUcb { ceiling } if !in_range(*ceiling) => Err(Error::ModelMismatch(format!(
                "kl_ucb needs every arm supported in [0, {ceiling}]"
            ))),
            StrategySpec::FixedArm { arm } => nu.check_arm(*arm),
            _ => Ok(()),
        }
    }

    pub fn build(&self, nu: &BanditProblem) -> Result<Box<dyn Strategy>> {
        self.check_compatible(nu)?;
        let k = nu.arm_count();
        Ok(match self {
            StrategySpec::Uniform => Box::new(Uniform::new(k)),
            StrategySpec::Ucb => Box::new(Ucb::new(k)),
            StrategySpec::KlUcb { ceiling } => {
                if !(ceiling.is_finite() && *ceiling > 0.0) {
                    return Err(Error::domain(format!("kl_ucb ceiling {ceiling} must be > 0")));
                }
                Box::new(KlUcb::new(k, *ceiling))
            }
            StrategySpec::Thompson => Box::new(Thompson::new(k)),
            StrategySpec::KnownMuStar { mu_star } => {
                Box::new(KnownMuStar::new(k, mu_star.unwrap_or(nu.mu_star())))
            }
            StrategySpec::Greedy => Box::new(Greedy::new(k)),
            StrategySpec::FixedArm { arm } => Box::new(FixedArm::new(k, *arm)),
            StrategySpec::CoinGreedy => Box::new(CoinGreedy::new(k)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn update_tracks_counts_and_means() {
        let mut s = Uniform::new(3);
        let mut r = rng();
        let a = s.choose(&mut r);
        s.update(a, 0.0).unwrap();
        assert_eq!(s.stats().count(a), 1);
        assert_eq!(s.stats().mean(a), Some(0.0));
        let mut fixed = FixedArm::new(2, 1);
        fixed.choose(&mut r);
        fixed.update(1, 0.0).unwrap();
        fixed.choose(&mut r);
        fixed.update(1, 1.0).unwrap();
        assert_eq!(fixed.stats().mean(1), Some(0.5));
        assert_eq!(fixed.stats().mean(0), None);
        assert_eq!(fixed.stats().rounds(), 2);
    }

    #[test]
    fn update_rejects_wrong_arm() {
        let mut s = FixedArm::new(2, 0);
        assert!(matches!(s.update(0, 1.0), Err(Error::Contract(_))));
        s.choose(&mut rng());
        assert!(matches!(s.update(1, 1.0), Err(Error::Contract(_))));
        s.update(0, 1.0).unwrap();
    }

    #[test]
    fn index_policies_pull_each_arm_once_first() {
        let mut r = rng();
        let builders: Vec<Box<dyn Strategy>> = vec![
            Box::new(Ucb::new(4)),
            Box::new(KlUcb::new(4, 1.0)),
            Box::new(Greedy::new(4)),
            Box::new(KnownMuStar::new(4, 0.5)),
        ];
        for mut s in builders {
            let mut seen = Vec::new();
            for _ in 0..4 {
                let a = s.choose(&mut r);
                s.update(a, 0.3).unwrap();
                seen.push(a);
            }
            seen.sort_unstable();
            assert_eq!(seen, [0, 1, 2, 3], "{}", s.name());
        }
    }

    #[test]
    fn opening_order_is_not_fixed() {
        let mut firsts = std::collections::BTreeSet::new();
        for seed in 0..40 {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            firsts.insert(Ucb::new(4).choose(&mut r));
        }
        assert_eq!(firsts.len(), 4);
    }

    #[test]
    fn kl_ucb_index_solves_the_budget_equation() {
        let q = kl_ucb_index(0.3, 10, 2.0, 1.0);
        assert_abs_diff_eq!(10.0 * bernoulli_kl_unchecked(0.3, q).value(), 2.0, epsilon = 1e-6);
        assert_abs_diff_eq!(kl_ucb_index(0.3, 1, 100.0, 1.0), 1.0, epsilon = 1e-8);
        let scaled = kl_ucb_index(0.6, 10, 2.0, 2.0);
        assert_abs_diff_eq!(scaled, 2.0 * q, epsilon = 1e-8);
    }

    #[test]
    fn candidate_thresholds() {
        let mut stats = ArmStats::new(2);
        stats.record(0, 0.5);
        stats.record(1, 0.7);
        // N = 1: threshold 0, strict inequality excludes the exact tie
        assert_eq!(known_mu_star_candidates(&stats, 0.5).unwrap(), vec![1]);
        let mut stats = ArmStats::new(2);
        for _ in 0..100 {
            stats.record(0, 0.2);
            stats.record(1, 0.0);
        }
        // threshold -sqrt(4 ln 100 / 100) = -0.42919
        assert_eq!(known_mu_star_candidates(&stats, 0.5).unwrap(), vec![0]);
        assert!(known_mu_star_candidates(&ArmStats::new(2), 0.5).is_err());
    }

    #[test]
    fn known_mu_star_falls_back_to_round_robin() {
        let mut s = KnownMuStar::new(3, 10.0);
        let mut r = rng();
        for t in 0..3 {
            let a = s.choose(&mut r);
            assert_eq!(a, t);
            s.update(a, 0.0).unwrap();
        }
        assert!(s.candidates().unwrap().is_empty());
        let mut seen = Vec::new();
        for _ in 0..6 {
            let a = s.choose(&mut r);
            seen.push(a);
            s.update(a, 0.0).unwrap();
        }
        assert_eq!(seen, vec![0, 1, 2, 0, 1, 2]);
    }

    #[test]
    fn uniform_draws_exactly_once_per_round() {
        let mut counting = rng();
        let mut s = Uniform::new(5);
        for _ in 0..10 {
            let a = s.choose(&mut counting);
            s.update(a, 0.0).unwrap();
        }
        let mut reference = rng();
        for _ in 0..10 {
            reference.next_u64();
        }
        assert_eq!(counting.next_u64(), reference.next_u64());
    }

    #[test]
    fn ucb_after_init_uses_no_draws_without_ties() {
        let mut s = Ucb::new(2);
        let mut r = rng();
        for reward in [1.0, 0.0] {
            let a = s.choose(&mut r);
            s.update(a, reward).unwrap();
        }
        let before = r.clone();
        assert_eq!(s.choose(&mut r), 0);
        assert_eq!(before, r);
    }

    #[test]
    fn spec_builds_and_checks() {
        let nu = BanditProblem::figure1();
        for spec in [
            StrategySpec::Uniform,
            StrategySpec::Ucb,
            StrategySpec::KlUcb { ceiling: 1.0 },
            StrategySpec::Thompson,
            StrategySpec::KnownMuStar { mu_star: None },
            StrategySpec::Greedy,
            StrategySpec::FixedArm { arm: 5 },
            StrategySpec::CoinGreedy,
        ] {
            let s = spec.build(&nu).unwrap();
            assert_eq!(s.name(), spec.id());
        }
        assert!(StrategySpec::FixedArm { arm: 6 }.build(&nu).is_err());
        let gauss = crate::models::BanditProblem::new(
            crate::models::Model::Gaussian { variance: 1.0 },
            vec![
                crate::models::Distribution::gaussian(0.0, 1.0).unwrap(),
                crate::models::Distribution::gaussian(-0.5, 1.0).unwrap(),
            ],
        )
        .unwrap();
        assert!(StrategySpec::Thompson.build(&gauss).is_err());
        assert!(StrategySpec::KnownMuStar { mu_star: None }.build(&gauss).is_ok());
    }

    #[test]
    fn clone_box_preserves_state() {
        let mut s: Box<dyn Strategy> = Box::new(KnownMuStar::new(2, 0.5));
        let mut r = rng();
        let a = s.choose(&mut r);
        s.update(a, 1.0).unwrap();
        let copy = s.clone();
        assert_eq!(copy.stats(), s.stats());
    }
}
