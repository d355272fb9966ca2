//! Regret lower bounds for stochastic multi-armed bandits.
//!
//! The crate bundles the pieces needed to compute, simulate and certify
//! distribution-dependent regret lower bounds:
//!
//! - [`divergence`]: Bernoulli `kl`, binary entropy, Lambert W and the small
//!   inequalities the bounds are assembled from.
//! - [`models`]: reward distributions, their KL closed forms, `K_inf` (including
//!   the bounded-support dual solver) and the well-behavedness constants.
//! - [`bounds`]: every computable lower bound as a curve over the horizon `T`,
//!   plus an envelope that shows the linear / transition / logarithmic phases.
//! - [`strategies`]: bandit algorithms behind one sequential decision contract.
//! - [`sim`]: seeded Monte Carlo environment and empirical definition checks.
//! - [`verify`]: exact enumeration of trajectory laws on micro instances, used
//!   to certify the chain-rule equality and the fundamental inequality.
//! - [`cli`]: the batch front-end used by the `banditlb` binary.
//!
//! Runnable walkthroughs live in `examples/`.

pub mod bounds;
pub mod cli;
pub mod divergence;
mod error;
pub mod models;
pub mod sim;
pub mod strategies;
pub mod verify;

pub use divergence::ExtNonNeg;
pub use error::{Error, Result};
pub use models::{BanditProblem, Distribution, Model};
