//! Monte Carlo regret of the shipped strategies on one problem.
//!
//!     cargo run --release --example compare_strategies

use banditlb::bounds::asymptotic_regret;
use banditlb::sim::{log_checkpoints, monte_carlo};
use banditlb::strategies::StrategySpec;
use banditlb::BanditProblem;

fn main() -> banditlb::Result<()> {
    let nu = BanditProblem::bernoulli(&[0.5, 0.45, 0.4, 0.3])?;
    let horizon = 5_000;
    let grid = log_checkpoints(horizon, 5);
    let specs = [
        StrategySpec::Uniform,
        StrategySpec::Greedy,
        StrategySpec::CoinGreedy,
        StrategySpec::Ucb,
        StrategySpec::KlUcb { ceiling: 1.0 },
        StrategySpec::Thompson,
        StrategySpec::KnownMuStar { mu_star: None },
    ];

    print!("{:>14}", "T");
    for t in &grid {
        print!("{t:>16}");
    }
    println!();
    for spec in &specs {
        let agg = monte_carlo(&nu, spec, horizon, 300, 1, &grid)?;
        print!("{:>14}", spec.id());
        for (m, s) in agg.mean_regret.iter().zip(&agg.stderr) {
            print!("{:>10.2} ±{s:<5.2}", m);
        }
        println!();
    }
    print!("{:>14}", "asymptotic");
    for &t in &grid {
        print!("{:>16.2}", asymptotic_regret(&nu, t)?);
    }
    println!();
    Ok(())
}
