//! The two-armed unit Gaussian bounds: the known-`mu*` bound, which stays
//! bounded in `T`, and the known-gap bound, which grows like `ln T / gap`.
//!
//!     cargo run --example known_gap

use banditlb::bounds::{bpr_known_gap, bpr_known_mu_star, known_gap_defining_residual};

fn main() -> banditlb::Result<()> {
    let delta = 0.2;
    println!("gap {delta}");
    println!("{:>10} {:>12} {:>12} {:>12} {:>12}", "T", "mu* v1", "mu* v2", "known gap", "residual");
    for t in [10u64, 100, 1_000, 10_000, 100_000, 1_000_000, 100_000_000] {
        let known = bpr_known_mu_star(delta, t)?;
        println!(
            "{t:>10} {:>12.4} {:>12.4} {:>12.4} {:>12.1e}",
            known.regret_v1,
            known.regret_v2,
            bpr_known_gap(delta, t)?,
            known_gap_defining_residual(delta, t)?
        );
    }
    Ok(())
}
