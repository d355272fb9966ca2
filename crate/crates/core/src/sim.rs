//! Seeded Monte Carlo environment.
//!
//! A run plays `T` rounds of choose / sample / update and records the
//! pseudo-regret `sum_a gap_a N_a(t)` at the requested checkpoints. Runs are
//! independent: run `i` of a batch uses seed `base_seed + i` (wrapping), and
//! that seed drives two ChaCha8 streams, stream 0 for rewards and stream 1 for
//! the strategy's draws. Batches run in parallel and are reduced in run order,
//! so results do not depend on the thread count.

use std::io::Write;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution as _, Gamma, Normal, Poisson};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::{BanditProblem, Distribution};
use crate::strategies::{unit_draw, StrategySpec};

/// Draws one reward from `d`.
pub fn sample_reward(d: &Distribution, mut rng: &mut dyn RngCore) -> Result<f64> {
    let bad = |e: &dyn std::fmt::Display| Error::domain(format!("cannot sample {}: {e}", d.family()));
    Ok(match d {
        Distribution::Bernoulli { p } => {
            if unit_draw(rng) < *p {
                1.0
            } else {
                0.0
            }
        }
        Distribution::Gaussian { mean, variance } => {
            Normal::new(*mean, variance.sqrt()).map_err(|e| bad(&e))?.sample(&mut rng)
        }
        Distribution::Poisson { mean } => Poisson::new(*mean).map_err(|e| bad(&e))?.sample(&mut rng),
        Distribution::Gamma { shape, mean } => {
            Gamma::new(*shape, mean / shape).map_err(|e| bad(&e))?.sample(&mut rng)
        }
        Distribution::Binomial { trials, mean } => {
            let n = f64::from(*trials);
            Binomial::new(u64::from(*trials), mean / n).map_err(|e| bad(&e))?.sample(&mut rng) as f64
        }
        Distribution::Dirac { point } => *point,
        Distribution::Finite { points, weights, .. } => {
            let u = unit_draw(rng);
            let mut acc = 0.0;
            let mut out = *points.last().expect("non-empty support");
            for (x, w) in points.iter().zip(weights) {
                acc += w;
                if u < acc {
                    out = *x;
                    break;
                }
            }
            out
        }
    })
}

/// Roughly `count` log-spaced horizons in `[1, horizon]`, always including both ends.
pub fn log_checkpoints(horizon: u64, count: usize) -> Vec<u64> {
    let count = count.max(2);
    let top = (horizon as f64).ln();
    let mut grid: Vec<u64> = (0..count)
        .map(|i| ((top * i as f64 / (count - 1) as f64).exp().round() as u64).clamp(1, horizon))
        .collect();
    grid.push(horizon);
    grid.sort_unstable();
    grid.dedup();
    grid
}

/// `count` evenly spaced horizons ending at `horizon`.
pub fn linear_checkpoints(horizon: u64, count: usize) -> Vec<u64> {
    let count = count.max(1) as u64;
    let mut grid: Vec<u64> = (1..=count).map(|i| (horizon * i / count).max(1)).collect();
    grid.dedup();
    grid
}

fn check_checkpoints(horizon: u64, checkpoints: &[u64]) -> Result<()> {
    if horizon == 0 {
        return Err(Error::precondition("horizon must be at least 1"));
    }
    if checkpoints.is_empty() || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::precondition("checkpoints must be non-empty and strictly increasing"));
    }
    if checkpoints[0] < 1 || *checkpoints.last().unwrap() > horizon {
        return Err(Error::precondition(format!("checkpoints must lie in [1, {horizon}]")));
    }
    Ok(())
}

/// One simulated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub seed: u64,
    pub horizon: u64,
    pub checkpoints: Vec<u64>,
    /// Pseudo-regret at each checkpoint.
    pub regret: Vec<f64>,
    /// Pull counts at each checkpoint.
    pub counts_at: Vec<Vec<u64>>,
    /// Pull counts at the horizon.
    pub final_counts: Vec<u64>,
}

fn pseudo_regret(gaps: &[f64], counts: &[u64]) -> f64 {
    gaps.iter().zip(counts).map(|(g, &n)| g * n as f64).sum()
}

/// Plays `horizon` rounds of `spec` on `nu`.
pub fn run_once(
    nu: &BanditProblem,
    spec: &StrategySpec,
    horizon: u64,
    seed: u64,
    checkpoints: &[u64],
) -> Result<RunRecord> {
    check_checkpoints(horizon, checkpoints)?;
    let mut strategy = spec.build(nu)?;
    let mut env_rng = ChaCha8Rng::seed_from_u64(seed);
    env_rng.set_stream(0);
    let mut choice_rng = ChaCha8Rng::seed_from_u64(seed);
    choice_rng.set_stream(1);

    let mut regret = Vec::with_capacity(checkpoints.len());
    let mut counts_at = Vec::with_capacity(checkpoints.len());
    let mut next = 0;
    for t in 1..=horizon {
        let arm = strategy.choose(&mut choice_rng);
        nu.check_arm(arm)?;
        let reward = sample_reward(nu.arm(arm), &mut env_rng)?;
        strategy.update(arm, reward)?;
        if next < checkpoints.len() && checkpoints[next] == t {
            let counts = strategy.stats().counts().to_vec();
            regret.push(pseudo_regret(nu.gaps(), &counts));
            counts_at.push(counts);
            next += 1;
        }
    }
    Ok(RunRecord {
        seed,
        horizon,
        checkpoints: checkpoints.to_vec(),
        regret,
        counts_at,
        final_counts: strategy.stats().counts().to_vec(),
    })
}

/// `runs` independent runs with seeds `base_seed + i`, in run order.
pub fn monte_carlo_records(
    nu: &BanditProblem,
    spec: &StrategySpec,
    horizon: u64,
    runs: usize,
    base_seed: u64,
    checkpoints: &[u64],
) -> Result<Vec<RunRecord>> {
    if runs == 0 {
        return Err(Error::precondition("runs must be at least 1"));
    }
    check_checkpoints(horizon, checkpoints)?;
    spec.check_compatible(nu)?;
    (0..runs)
        .into_par_iter()
        .map(|i| {
            run_once(nu, spec, horizon, base_seed.wrapping_add(i as u64), checkpoints)
                .map_err(|e| Error::RunFailed { run: i, source: Box::new(e) })
        })
        .collect()
}

/// Sample mean and standard error `s / sqrt(n)` (`s` with `n - 1`), summed in
/// slice order. One sample has standard error 0.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt() / n.sqrt())
}

/// Mean pseudo-regret and pull counts over a batch of runs.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateCurve {
    pub checkpoints: Vec<u64>,
    pub mean_regret: Vec<f64>,
    pub stderr: Vec<f64>,
    pub runs: usize,
    /// `mean_counts[i][a]`: mean of `N_a` at checkpoint `i`.
    pub mean_counts: Vec<Vec<f64>>,
    pub count_stderr: Vec<Vec<f64>>,
}

impl AggregateCurve {
    pub fn from_records(records: &[RunRecord]) -> Result<Self> {
        let first = records.first().ok_or_else(|| Error::precondition("no runs to aggregate"))?;
        let k = first.final_counts.len();
        let mut out = AggregateCurve {
            checkpoints: first.checkpoints.clone(),
            mean_regret: Vec::new(),
            stderr: Vec::new(),
            runs: records.len(),
            mean_counts: Vec::new(),
            count_stderr: Vec::new(),
        };
        for i in 0..first.checkpoints.len() {
            let column: Vec<f64> = records.iter().map(|r| r.regret[i]).collect();
            let (m, s) = mean_and_stderr(&column);
            out.mean_regret.push(m);
            out.stderr.push(s);
            let (means, errs): (Vec<f64>, Vec<f64>) = (0..k)
                .map(|a| {
                    let column: Vec<f64> = records.iter().map(|r| r.counts_at[i][a] as f64).collect();
                    mean_and_stderr(&column)
                })
                .unzip();
            out.mean_counts.push(means);
            out.count_stderr.push(errs);
        }
        Ok(out)
    }

    /// Position of checkpoint `t`, if recorded.
    pub fn index_of(&self, t: u64) -> Option<usize> {
        self.checkpoints.binary_search(&t).ok()
    }

    /// Writes `T,mean_regret,stderr,runs`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Contract(format!("csv write failed: {e}"));
        w.write_record(["T", "mean_regret", "stderr", "runs"]).map_err(io)?;
        for i in 0..self.checkpoints.len() {
            w.write_record([
                self.checkpoints[i].to_string(),
                self.mean_regret[i].to_string(),
                self.stderr[i].to_string(),
                self.runs.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Contract(format!("csv flush failed: {e}")))
    }

    /// Writes `arm,mean_count,stderr` at the last checkpoint, arms numbered from 1.
    pub fn write_counts_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Contract(format!("csv write failed: {e}"));
        w.write_record(["arm", "mean_count", "stderr"]).map_err(io)?;
        let last = self.checkpoints.len() - 1;
        for (a, (m, s)) in self.mean_counts[last].iter().zip(&self.count_stderr[last]).enumerate() {
            w.write_record([(a + 1).to_string(), m.to_string(), s.to_string()]).map_err(io)?;
        }
        w.flush().map_err(|e| Error::Contract(format!("csv flush failed: {e}")))
    }
}

/// Runs a batch and aggregates it.
pub fn monte_carlo(
    nu: &BanditProblem,
    spec: &StrategySpec,
    horizon: u64,
    runs: usize,
    base_seed: u64,
    checkpoints: &[u64],
) -> Result<AggregateCurve> {
    let records = monte_carlo_records(nu, spec, horizon, runs, base_seed, checkpoints)?;
    AggregateCurve::from_records(&records)
}

/// One sample-level test of a strategy property.
#[derive(Debug, Clone, PartialEq)]
pub struct DefinitionCheck {
    pub name: String,
    pub estimate: f64,
    pub reference: f64,
    pub stderr: f64,
    /// Standardised shortfall; positive means the estimate falls on the wrong side.
    pub z: f64,
    pub violated: bool,
}

/// Threshold, in standard errors, above which a check is reported as violated.
pub const VIOLATION_Z: f64 = 4.0;

fn check(name: String, estimate: f64, reference: f64, stderr: f64, shortfall: f64) -> DefinitionCheck {
    let z = if stderr > 0.0 {
        shortfall / stderr
    } else if shortfall > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    DefinitionCheck { name, estimate, reference, stderr, z, violated: z > VIOLATION_Z }
}

fn optimal_pulls(nu: &BanditProblem, r: &RunRecord) -> f64 {
    nu.optimal_arms().iter().map(|&a| r.final_counts[a] as f64).sum()
}

/// The problem used for the monotonicity check: every suboptimal arm takes
/// the law of the (first) worst arm.
pub fn lowered_problem(nu: &BanditProblem) -> Result<BanditProblem> {
    let worst = nu.arm(nu.worst_arms()[0]).clone();
    let arms = (0..nu.arm_count())
        .map(|a| if nu.is_optimal(a) { nu.arm(a).clone() } else { worst.clone() })
        .collect();
    nu.with_arms(arms)
}

/// Which sample-level definition checks to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefinitionKind {
    /// Each optimal arm gets at least `T/K` pulls.
    SmarterThanUniform,
    /// Optimal arms with identical laws get the same expected pulls.
    PairwiseSymmetric,
    /// Lowering suboptimal means does not reduce optimal pulls.
    Monotonic,
}

/// Sample estimates and z-scores for the requested definitions.
///
/// The symmetry check needs two optimal arms with equal laws and the
/// monotonicity check needs a suboptimal arm; otherwise this is a
/// precondition error.
pub fn empirical_definition_checks(
    nu: &BanditProblem,
    spec: &StrategySpec,
    horizon: u64,
    runs: usize,
    base_seed: u64,
    kinds: &[DefinitionKind],
) -> Result<Vec<DefinitionCheck>> {
    let optimal = nu.optimal_arms();
    let mut pairs = Vec::new();
    for (i, &a) in optimal.iter().enumerate() {
        for &b in &optimal[i + 1..] {
            if nu.arm(a) == nu.arm(b) {
                pairs.push((a, b));
            }
        }
    }
    if kinds.contains(&DefinitionKind::PairwiseSymmetric) && pairs.is_empty() {
        return Err(Error::precondition("symmetry check needs two optimal arms with identical laws"));
    }
    if kinds.contains(&DefinitionKind::Monotonic) && nu.suboptimal_arms().is_empty() {
        return Err(Error::precondition("monotonicity check needs a suboptimal arm"));
    }

    let records = monte_carlo_records(nu, spec, horizon, runs, base_seed, &[horizon])?;
    let k = nu.arm_count() as f64;
    let mut out = Vec::new();
    for kind in kinds {
        match kind {
            DefinitionKind::SmarterThanUniform => {
                let reference = horizon as f64 / k;
                for &a in &optimal {
                    let xs: Vec<f64> = records.iter().map(|r| r.final_counts[a] as f64).collect();
                    let (m, s) = mean_and_stderr(&xs);
                    out.push(check(format!("smarter_than_uniform[arm {}]", a + 1), m, reference, s, reference - m));
                }
            }
            DefinitionKind::PairwiseSymmetric => {
                for &(a, b) in &pairs {
                    let xs: Vec<f64> = records
                        .iter()
                        .map(|r| r.final_counts[a] as f64 - r.final_counts[b] as f64)
                        .collect();
                    let (m, s) = mean_and_stderr(&xs);
                    out.push(check(format!("pairwise_symmetric[arms {},{}]", a + 1, b + 1), m, 0.0, s, m.abs()));
                }
            }
            DefinitionKind::Monotonic => {
                let lowered = lowered_problem(nu)?;
                let other_seed = base_seed.wrapping_add(runs as u64);
                let lowered_records = monte_carlo_records(&lowered, spec, horizon, runs, other_seed, &[horizon])?;
                let xs: Vec<f64> = records.iter().map(|r| optimal_pulls(nu, r)).collect();
                let ys: Vec<f64> = lowered_records.iter().map(|r| optimal_pulls(&lowered, r)).collect();
                let (mx, sx) = mean_and_stderr(&xs);
                let (my, sy) = mean_and_stderr(&ys);
                let s = (sx * sx + sy * sy).sqrt();
                out.push(check("monotonic[optimal pulls]".into(), my, mx, s, mx - my));
            }
        }
    }
    Ok(out)
}
