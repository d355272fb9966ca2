//! The full verification battery behind `banditlb verify`.

use std::io::Write;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::grids::{all_grids, library_kl, KlFn};
use super::oracle::k_inf_primal_grid;
use super::{chain_rule_residual, data_processing_check, enumerate, fundamental_slack, SymbolStream, ZStat};
use crate::divergence::bernoulli_kl;
use crate::error::{Error, Result};
use crate::models::{k_inf, k_inf_continuity_increment, BanditProblem, Distribution, Model};
use crate::sim::{mean_and_stderr, sample_reward};
use crate::strategies::StrategySpec;

/// Tolerance of the chain-rule identity.
pub const CHAIN_RULE_TOL: f64 = 1e-10;
/// Most negative slack accepted for the fundamental inequality.
pub const SLACK_TOL: f64 = -1e-10;
/// Most negative slack accepted for the data-processing battery.
pub const DATA_PROCESSING_TOL: f64 = -1e-12;
/// Dual solver versus primal oracle.
pub const KINF_ORACLE_TOL: f64 = 1e-4;
/// Exponential-family reduction versus closed-form `kl`.
pub const KINF_REDUCTION_TOL: f64 = 1e-10;
/// Extra room in the numerical continuity check.
pub const CONTINUITY_TOL: f64 = 1e-6;
/// Monte Carlo agreement, in standard errors.
pub const MC_Z_LIMIT: f64 = 5.0;

/// Knobs of the battery.
#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub quick: bool,
    pub seed: u64,
    /// Bernoulli kernel fed to the grid sweeps.
    pub kl: KlFn,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { quick: false, seed: 20_240_601, kl: library_kl }
    }
}

/// One line of the report CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub instance_id: String,
    pub check: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl ReportRow {
    fn at_most(instance_id: impl Into<String>, check: impl Into<String>, value: f64, threshold: f64) -> Self {
        ReportRow { instance_id: instance_id.into(), check: check.into(), value, threshold, pass: value <= threshold }
    }

    fn at_least(instance_id: impl Into<String>, check: impl Into<String>, value: f64, threshold: f64) -> Self {
        ReportRow { instance_id: instance_id.into(), check: check.into(), value, threshold, pass: value >= threshold }
    }
}

/// Writes `instance_id,check,value,threshold,pass`.
pub fn write_report<W: Write>(rows: &[ReportRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Contract(format!("csv write failed: {e}"));
    w.write_record(["instance_id", "check", "value", "threshold", "pass"]).map_err(io)?;
    for r in rows {
        w.write_record([
            r.instance_id.as_str(),
            r.check.as_str(),
            &r.value.to_string(),
            &r.threshold.to_string(),
            if r.pass { "true" } else { "false" },
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Contract(format!("csv flush failed: {e}")))
}

/// One micro instance for the exact checks.
#[derive(Debug, Clone)]
pub struct ExactInstance {
    pub id: String,
    pub nu: BanditProblem,
    pub nu_prime: BanditProblem,
    pub spec: StrategySpec,
    pub horizon: usize,
    pub alphabet: u32,
}

const PARAM_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

fn strategy_mix() -> Vec<(StrategySpec, u32)> {
    vec![
        (StrategySpec::FixedArm { arm: 0 }, 1),
        (StrategySpec::Greedy, 1),
        (StrategySpec::Ucb, 1),
        (StrategySpec::KlUcb { ceiling: 1.0 }, 1),
        (StrategySpec::Uniform, 2),
        (StrategySpec::CoinGreedy, 2),
        (StrategySpec::KnownMuStar { mu_star: None }, 2),
        (StrategySpec::Ucb, 2),
    ]
}

/// `K in {2, 3}` x `T in 1..=8` (`1..=6` when quick) x eight strategy
/// settings, with Bernoulli parameters drawn from `{0.1, ..., 0.9}`.
pub fn exact_instances(quick: bool, seed: u64) -> Vec<ExactInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_t = if quick { 6 } else { 8 };
    let mut out = Vec::new();
    for k in [2usize, 3] {
        for horizon in 1..=max_t {
            for (spec, alphabet) in strategy_mix() {
                let draw = |rng: &mut ChaCha8Rng| PARAM_GRID[rng.random_range(0..PARAM_GRID.len())];
                let means: Vec<f64> = (0..k).map(|_| draw(&mut rng)).collect();
                let mut prime = means.clone();
                // alternate between moving one arm and moving all of them
                if out.len() % 2 == 0 {
                    let a = rng.random_range(0..k);
                    while prime[a] == means[a] {
                        prime[a] = draw(&mut rng);
                    }
                } else {
                    prime = (0..k).map(|_| draw(&mut rng)).collect();
                }
                let id = format!("exact-{:03}-{}-K{k}-T{horizon}-R{alphabet}", out.len(), spec.id());
                out.push(ExactInstance {
                    id,
                    nu: BanditProblem::bernoulli(&means).expect("grid values are probabilities"),
                    nu_prime: BanditProblem::bernoulli(&prime).expect("grid values are probabilities"),
                    spec,
                    horizon,
                    alphabet,
                });
            }
        }
    }
    out
}

/// Chain-rule and fundamental-inequality rows for one instance.
pub fn exact_rows(inst: &ExactInstance) -> Result<Vec<ReportRow>> {
    let table = enumerate(&inst.nu, &inst.nu_prime, &inst.spec, inst.horizon, inst.alphabet)?;
    let mut rows = vec![
        ReportRow::at_most(&inst.id, "normalisation_nu", (table.total_nu() - 1.0).abs(), 1e-12),
        ReportRow::at_most(&inst.id, "normalisation_nu_prime", (table.total_nu_prime() - 1.0).abs(), 1e-12),
        ReportRow::at_most(&inst.id, "chain_rule_residual", chain_rule_residual(&table)?, CHAIN_RULE_TOL),
    ];
    for z in ZStat::all(inst.nu.arm_count()) {
        let slack = fundamental_slack(&table, z)?;
        rows.push(ReportRow::at_least(&inst.id, format!("fundamental_slack[{}]", z.label()), slack, SLACK_TOL));
    }
    Ok(rows)
}

/// Trajectory KL for horizons `1..=max_t` must be nondecreasing.
pub fn information_growth_rows(inst: &ExactInstance, max_t: usize) -> Result<Vec<ReportRow>> {
    let mut previous = 0.0;
    let mut worst = f64::INFINITY;
    for t in 1..=max_t {
        let table = enumerate(&inst.nu, &inst.nu_prime, &inst.spec, t, inst.alphabet)?;
        let kl = table.trajectory_kl();
        worst = worst.min(kl - previous);
        previous = kl;
    }
    Ok(vec![ReportRow::at_least(&inst.id, "information_nondecreasing_in_T", worst, -CHAIN_RULE_TOL)])
}

/// Uniform symbols from `0..alphabet`, served as the midpoints the
/// enumerator uses, so sampling and enumeration see the same strategy.
struct LatticeStream<'a> {
    inner: &'a mut ChaCha8Rng,
    alphabet: u32,
}

impl RngCore for LatticeStream<'_> {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        let s = self.inner.random_range(0..self.alphabet);
        SymbolStream::new(s, self.alphabet).next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let bytes = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}

fn lattice_counts(inst: &ExactInstance, seed: u64) -> Result<Vec<u64>> {
    let mut strategy = inst.spec.build(&inst.nu)?;
    let mut env = ChaCha8Rng::seed_from_u64(seed);
    env.set_stream(0);
    let mut symbols = ChaCha8Rng::seed_from_u64(seed);
    symbols.set_stream(1);
    for _ in 0..inst.horizon {
        let arm = strategy.choose(&mut LatticeStream { inner: &mut symbols, alphabet: inst.alphabet });
        let reward = sample_reward(inst.nu.arm(arm), &mut env)?;
        strategy.update(arm, reward)?;
    }
    Ok(strategy.stats().counts().to_vec())
}

/// Largest `|E_enum[N_a] - E_mc[N_a]| / stderr` over arms (with `runs` runs
/// of the lattice-discretised strategy).
pub fn monte_carlo_agreement(inst: &ExactInstance, runs: usize, seed: u64) -> Result<f64> {
    let table = enumerate(&inst.nu, &inst.nu_prime, &inst.spec, inst.horizon, inst.alphabet)?;
    let counts = (0..runs as u64)
        .into_par_iter()
        .map(|i| lattice_counts(inst, seed.wrapping_add(i)))
        .collect::<Result<Vec<_>>>()?;
    let mut worst: f64 = 0.0;
    for a in 0..inst.nu.arm_count() {
        let xs: Vec<f64> = counts.iter().map(|c| c[a] as f64).collect();
        let (mean, se) = mean_and_stderr(&xs);
        let diff = (table.expected_count_nu(a) - mean).abs();
        let z = if se > 0.0 {
            diff / se
        } else if diff <= 1e-9 {
            0.0
        } else {
            f64::INFINITY
        };
        worst = worst.max(z);
    }
    Ok(worst)
}

/// Smallest data-processing slack over `count` random triples.
pub fn data_processing_battery(count: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..count {
        let n = rng.random_range(2..=super::MAX_OUTCOMES);
        let law = |rng: &mut ChaCha8Rng| {
            let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
            let s: f64 = raw.iter().sum();
            raw.into_iter().map(|x| x / s).collect::<Vec<f64>>()
        };
        let p1 = law(&mut rng);
        let p2 = law(&mut rng);
        let z: Vec<f64> = (0..n)
            .map(|_| match rng.random_range(0..4) {
                0 => 0.0,
                1 => 1.0,
                _ => rng.random::<f64>(),
            })
            .collect();
        worst = worst.min(data_processing_check(&p1, &p2, &z)?);
    }
    Ok(worst)
}

/// A random finite law for the `K_inf` checks, with its level `x`.
#[derive(Debug, Clone)]
pub struct KinfInstance {
    pub law: Distribution,
    pub ceiling: f64,
    pub x: f64,
}

/// Supports of 2 or 3 points in `[0, M]` (`M` in `{1, 2}`), weights at
/// least 0.05, level strictly between the mean and `M`.
pub fn kinf_instances(count: usize, seed: u64) -> Vec<KinfInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let ceiling = if rng.random_bool(0.5) { 1.0 } else { 2.0 };
            let n = rng.random_range(2..=3);
            let points: Vec<f64> = (0..n).map(|_| (rng.random::<f64>() * ceiling * 100.0).round() / 100.0).collect();
            let raw: Vec<f64> = (0..n).map(|_| 0.05 + rng.random::<f64>()).collect();
            let s: f64 = raw.iter().sum();
            let mut weights: Vec<f64> = raw.iter().map(|w| w / s).collect();
            let head: f64 = weights[..n - 1].iter().sum();
            weights[n - 1] = 1.0 - head;
            let law = Distribution::finite(points, weights, ceiling).expect("valid finite law");
            let mean = law.mean();
            let x = mean + (ceiling - mean) * rng.random_range(0.1..0.8);
            KinfInstance { law, ceiling, x }
        })
        .collect()
}

/// Dual-versus-oracle and continuity rows for one finite law.
pub fn kinf_rows(id: &str, inst: &KinfInstance) -> Result<Vec<ReportRow>> {
    let model = Model::BoundedSupport { ceiling: inst.ceiling };
    let (pts, ws) = inst.law.finite_support().expect("finite law");
    let dual = k_inf(&inst.law, inst.x, &model)?.value();
    let primal = k_inf_primal_grid(&pts, &ws, inst.x, inst.ceiling)?;
    let mut rows = vec![
        ReportRow::at_most(id, "k_inf_dual_vs_primal_oracle", (primal - dual).abs(), KINF_ORACLE_TOL),
        ReportRow::at_least(id, "k_inf_dual_below_primal", primal - dual, -1e-9),
    ];
    let mu_star = inst.x;
    let limit = model.continuity_eps_limit(mu_star)?;
    let base = k_inf(&inst.law, mu_star, &model)?.value();
    let mut worst = f64::INFINITY;
    for frac in [0.05, 0.25, 0.5, 0.75, 0.99] {
        let eps = frac * limit;
        let lifted = k_inf(&inst.law, mu_star + eps, &model)?.value();
        let bound = base + k_inf_continuity_increment(&inst.law, mu_star, eps, &model)?;
        worst = worst.min(bound + CONTINUITY_TOL - lifted);
    }
    rows.push(ReportRow::at_least(id, "k_inf_continuity", worst, 0.0));
    Ok(rows)
}

/// Number of `(p, x)` pairs in [`kinf_reduction_gap`].
pub const KINF_REDUCTION_PAIRS: usize = 50;

/// Largest `|k_inf(Bernoulli(p), x) - kl(p, x)|` over 50 grid pairs `p < x`.
pub fn kinf_reduction_gap() -> Result<f64> {
    let grid = [0.02, 0.1, 0.25, 0.3, 0.4, 0.5, 0.6, 0.75, 0.9, 0.97, 0.999];
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    for (i, &p) in grid.iter().enumerate() {
        for &x in &grid[i + 1..] {
            if pairs == KINF_REDUCTION_PAIRS {
                break;
            }
            let d = Distribution::bernoulli(p)?;
            let via_model = k_inf(&d, x, &Model::Bernoulli)?.value();
            let closed = bernoulli_kl(p, x)?.value();
            worst = worst.max((via_model - closed).abs());
            // the same law seen as a finite law in the bounded-support model
            let finite = Distribution::finite(vec![0.0, 1.0], vec![1.0 - p, p], 1.0)?;
            let dual = k_inf(&finite, x, &Model::BoundedSupport { ceiling: 1.0 })?.value();
            if (dual - closed).abs() > 1e-6 {
                return Err(Error::Contract(format!("finite-model K_inf({p}, {x}) = {dual}, kl = {closed}")));
            }
            pairs += 1;
        }
    }
    debug_assert_eq!(pairs, KINF_REDUCTION_PAIRS);
    Ok(worst)
}

/// Runs every check and returns the report rows (failures included).
pub fn run_battery(opts: &VerifyOptions) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    for g in all_grids(opts.kl) {
        rows.push(ReportRow::at_most(format!("grid-{}", g.name), "violations", g.violations as f64, 0.0));
    }

    let instances = exact_instances(opts.quick, opts.seed);
    for inst in &instances {
        rows.extend(exact_rows(inst)?);
    }
    for inst in instances.iter().filter(|i| i.horizon == 6 && i.nu.arm_count() == 2) {
        rows.extend(information_growth_rows(inst, inst.horizon)?);
    }
    let mc_runs = if opts.quick { 1000 } else { 4000 };
    let mc_t = if opts.quick { 6 } else { 8 };
    for inst in instances.iter().filter(|i| i.horizon == mc_t && i.nu.arm_count() == 2) {
        let z = monte_carlo_agreement(inst, mc_runs, opts.seed)?;
        rows.push(ReportRow::at_most(&inst.id, "monte_carlo_agreement_z", z, MC_Z_LIMIT));
    }

    let triples = if opts.quick { 1000 } else { 10_000 };
    rows.push(ReportRow::at_least(
        format!("data-processing-{triples}"),
        "min_slack",
        data_processing_battery(triples, opts.seed)?,
        DATA_PROCESSING_TOL,
    ));

    rows.push(ReportRow::at_most("k-inf-bernoulli-reduction", "max_abs_error", kinf_reduction_gap()?, KINF_REDUCTION_TOL));
    let count = if opts.quick { 5 } else { 20 };
    for (i, inst) in kinf_instances(count, opts.seed).iter().enumerate() {
        rows.extend(kinf_rows(&format!("k-inf-finite-{i:02}"), inst)?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instance_battery_shape() {
        let all = exact_instances(false, 1);
        assert!(all.len() >= 100);
        assert!(all.iter().any(|i| i.alphabet == 2));
        assert!(all.iter().any(|i| i.nu.arm_count() == 3 && i.horizon == 8));
        assert!(all.iter().all(|i| i.nu.means() != i.nu_prime.means()));
    }

    #[test]
    fn kinf_instances_are_valid() {
        for inst in kinf_instances(20, 3) {
            assert!(inst.law.mean() < inst.x && inst.x < inst.ceiling);
        }
    }

    #[test]
    fn report_csv_header() {
        let rows = vec![ReportRow::at_most("a", "b", 0.5, 1.0)];
        let mut buf = Vec::new();
        write_report(&rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "instance_id,check,value,threshold,pass\na,b,0.5,1,true\n");
    }
}
