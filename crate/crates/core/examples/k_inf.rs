//! `K_inf` in exponential families and on bounded supports.
//!
//! For a one-parameter exponential family `K_inf(d, x)` is the divergence to
//! the member with mean `x`. On `[0, M]` it comes from a one-dimensional
//! concave dual, cross-checked here against a brute-force primal search.
//!
//!     cargo run --example k_inf

use banditlb::models::{k_inf, k_inf_continuity_increment, kl_div};
use banditlb::verify::oracle::k_inf_primal_grid;
use banditlb::{Distribution, Model};

fn main() -> banditlb::Result<()> {
    let cases = [
        (Model::Bernoulli, Distribution::bernoulli(0.04)?, 0.05),
        (Model::Gaussian { variance: 1.0 }, Distribution::gaussian(-0.5, 1.0)?, 0.0),
        (Model::Poisson, Distribution::poisson(1.0)?, 2.0),
        (Model::Gamma { shape: 2.0 }, Distribution::gamma(2.0, 1.0)?, 1.5),
    ];
    for (model, d, x) in &cases {
        println!("{:<9} mean {:>5}  K_inf(., {x}) = {:.8}", d.family(), d.mean(), k_inf(d, *x, model)?.value());
    }
    let p = Distribution::poisson(1.0)?;
    println!("Poisson(1) vs Poisson(2) by closed form: {:.8}", kl_div(&p, &Distribution::poisson(2.0)?)?.value());

    let model = Model::BoundedSupport { ceiling: 1.0 };
    let law = Distribution::finite(vec![0.0, 0.3, 0.8], vec![0.5, 0.3, 0.2], 1.0)?;
    let (pts, ws) = law.finite_support().expect("finite law");
    println!("\nfinite law with mean {:.3} on [0, 1]", law.mean());
    println!("{:>6} {:>14} {:>14}", "x", "dual", "primal grid");
    for x in [0.3, 0.45, 0.6, 0.9] {
        let dual = k_inf(&law, x, &model)?.value();
        println!("{x:>6} {dual:>14.8} {:>14.8}", k_inf_primal_grid(&pts, &ws, x, 1.0)?);
    }

    let mu = 0.5;
    let eps = 0.5 * model.continuity_eps_limit(mu)?;
    let lifted = k_inf(&law, mu + eps, &model)?.value();
    let bound = k_inf(&law, mu, &model)?.value() + k_inf_continuity_increment(&law, mu, eps, &model)?;
    println!("\ncontinuity at mu* = {mu}, eps = {eps}: {lifted:.6} <= {bound:.6}");
    Ok(())
}
