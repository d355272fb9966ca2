//! The flagship experiment: Thompson sampling on six Bernoulli arms, 500 runs
//! to `T = 10^4`, written as CSVs plus a plot script.
//!
//!     cargo run --release --example figure1 [OUT_DIR]

use banditlb::cli::{run_config, Command, ExperimentConfig};

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "figure1-out".into());
    let cfg = ExperimentConfig::figure1(20_240_601, out.into());
    match run_config(Command::Figure1, &cfg) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("{}", f.display());
            }
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.code);
        }
    }
    let regret = std::fs::read_to_string(cfg.out.join("regret.csv")).expect("regret.csv");
    for line in regret.lines().filter(|l| {
        let t = l.split(',').next().unwrap_or("");
        ["T", "10", "100", "200", "1000", "5000", "10000"].contains(&t)
    }) {
        println!("{line}");
    }
}
