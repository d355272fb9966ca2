//! Bernoulli kl, binary entropy and Lambert W, plus a quick look at how tight
//! the classical and local Pinsker inequalities are.
//!
//!     cargo run --example divergences

use banditlb::divergence::{bernoulli_kl, binary_entropy, lambert_w};

fn main() -> banditlb::Result<()> {
    println!("kl(p, q) against its quadratic lower bounds");
    println!("{:>6} {:>6} {:>12} {:>12} {:>12}", "p", "q", "kl", "2(p-q)^2", "(p-q)^2/2q");
    for (p, q) in [(0.04, 0.05), (0.1, 0.5), (0.01, 0.02), (0.5, 0.9), (0.3, 0.31)] {
        let kl = bernoulli_kl(p, q)?;
        let d2 = (p - q) * (p - q);
        println!("{p:>6} {q:>6} {:>12.6e} {:>12.6e} {:>12.6e}", kl.value(), 2.0 * d2, d2 / (2.0 * q));
    }
    // near zero the local form is far sharper than the classical one
    println!("\nkl(0, 1) = {}", bernoulli_kl(0.0, 1.0)?);

    println!("\nh(x) <= x ln(4/x)");
    for x in [0.001, 0.01, 0.1, 0.25, 0.5] {
        println!("  x = {x:<6} h = {:.6}  bound = {:.6}", binary_entropy(x)?, x * (4.0 / x).ln());
    }

    println!("\nLambert W and its sandwich ln u - ln ln u <= W(u) <= ln u");
    for u in [1.0, std::f64::consts::E, 10.0, 1e4, 1e12] {
        let w = lambert_w(u)?;
        println!("  W({u:e}) = {w:.12}   relative residual {:.1e}", (w * w.exp() - u) / u);
    }
    Ok(())
}
