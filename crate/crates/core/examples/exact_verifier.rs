//! Exact trajectory laws of a strategy on a micro instance.
//!
//! Every (randomisation symbol, reward) path is enumerated under two
//! problems, which certifies the chain rule and the fundamental inequality
//! to rounding error for each statistic `Z`.
//!
//!     cargo run --example exact_verifier

use banditlb::strategies::StrategySpec;
use banditlb::verify::{chain_rule_residual, enumerate, fundamental_slack, ZStat};
use banditlb::BanditProblem;

fn main() -> banditlb::Result<()> {
    let nu = BanditProblem::bernoulli(&[0.7, 0.4, 0.2])?;
    let nu_prime = BanditProblem::bernoulli(&[0.7, 0.8, 0.2])?;
    for (spec, alphabet) in [(StrategySpec::Ucb, 1), (StrategySpec::CoinGreedy, 2)] {
        let table = enumerate(&nu, &nu_prime, &spec, 6, alphabet)?;
        println!("{} with R = {alphabet}: {} trajectories", spec.id(), table.rows.len());
        println!("  E[N_a(T)] under nu: {:?}", (0..3).map(|a| format!("{:.4}", table.expected_count_nu(a))).collect::<Vec<_>>());
        println!("  KL(P_nu, P_nu') = {:.12}", table.trajectory_kl());
        println!("  information     = {:.12}", table.information());
        println!("  chain-rule residual {:.1e}", chain_rule_residual(&table)?);
        for z in ZStat::all(3) {
            println!("    slack[{:<16}] = {:.6}", z.label(), fundamental_slack(&table, z)?);
        }
    }
    Ok(())
}
