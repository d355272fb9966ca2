use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use banditlb::sim::{log_checkpoints, monte_carlo, run_once, sample_reward};
use banditlb::strategies::StrategySpec;
use banditlb::{BanditProblem, Distribution, Model};

fn variance(d: &Distribution) -> f64 {
    match d {
        Distribution::Bernoulli { p } => p * (1.0 - p),
        Distribution::Gaussian { variance, .. } => *variance,
        Distribution::Poisson { mean } => *mean,
        Distribution::Gamma { shape, mean } => mean * mean / shape,
        Distribution::Binomial { trials, mean } => mean * (1.0 - mean / f64::from(*trials)),
        Distribution::Dirac { .. } => 0.0,
        Distribution::Finite { points, weights, .. } => {
            let m = d.mean();
            points.iter().zip(weights).map(|(x, w)| w * (x - m) * (x - m)).sum()
        }
    }
}

#[test]
fn sample_means_land_within_five_sigma() {
    let laws = [
        Distribution::bernoulli(0.3).unwrap(),
        Distribution::gaussian(-1.5, 4.0).unwrap(),
        Distribution::poisson(2.5).unwrap(),
        Distribution::gamma(3.0, 2.0).unwrap(),
        Distribution::binomial(12, 4.2).unwrap(),
        Distribution::dirac(0.7).unwrap(),
        Distribution::finite(vec![0.0, 0.25, 2.0], vec![0.5, 0.3, 0.2], 2.0).unwrap(),
    ];
    let n = 1_000_000;
    for (i, d) in laws.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + i as u64);
        let mut sum = 0.0;
        for _ in 0..n {
            let x = sample_reward(d, &mut rng).unwrap();
            if let Some((pts, _)) = d.finite_support() {
                assert!(pts.contains(&x), "{} drew {x}", d.family());
            }
            sum += x;
        }
        let mean = sum / n as f64;
        let sigma = (variance(d) / n as f64).sqrt();
        assert!((mean - d.mean()).abs() <= 5.0 * sigma + 1e-9, "{}: {mean} vs {}", d.family(), d.mean());
    }
}

#[test]
fn counts_add_up_and_regret_is_the_gap_weighted_count() {
    let nu = BanditProblem::new(
        Model::Poisson,
        vec![Distribution::poisson(1.0).unwrap(), Distribution::poisson(1.5).unwrap(), Distribution::poisson(0.5).unwrap()],
    )
    .unwrap();
    let grid = log_checkpoints(2_000, 12);
    for seed in 0..5 {
        let r = run_once(&nu, &StrategySpec::Ucb, 2_000, seed, &grid).unwrap();
        for (i, &t) in r.checkpoints.iter().enumerate() {
            assert_eq!(r.counts_at[i].iter().sum::<u64>(), t);
            let identity: f64 = nu.gaps().iter().zip(&r.counts_at[i]).map(|(g, &n)| g * n as f64).sum();
            assert_eq!(r.regret[i], identity);
        }
    }
}

#[test]
fn batches_do_not_depend_on_the_thread_pool() {
    let nu = BanditProblem::figure1();
    let grid = log_checkpoints(1_000, 10);
    let wide = monte_carlo(&nu, &StrategySpec::Thompson, 1_000, 64, 77, &grid).unwrap();
    let narrow = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| monte_carlo(&nu, &StrategySpec::Thompson, 1_000, 64, 77, &grid).unwrap());
    assert_eq!(wide, narrow);
}
