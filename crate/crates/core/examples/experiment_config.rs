//! Driving the batch front-end from a TOML string instead of the binary.
//!
//!     cargo run --example experiment_config

use banditlb::cli::{run_config, Command, ExperimentConfig};

const CONFIG: &str = r#"
horizon = 2000
runs = 100
seed = 3

[problem]
model = "poisson"
means = [1.0, 1.4, 0.6]

[strategy]
id = "ucb"

[checkpoints]
kind = "linear"
count = 4

[bounds]
ids = ["asymptotic", "distribution_free_opt"]
"#;

fn main() {
    let mut cfg = ExperimentConfig::from_toml_str(CONFIG).unwrap_or_else(|e| panic!("{e}"));
    println!("{}", cfg.to_toml_string().unwrap());
    let dir = tempfile::tempdir().expect("temp dir");
    cfg.out = dir.path().to_path_buf();
    for command in [Command::Bounds, Command::Simulate] {
        let outcome = run_config(command, &cfg).unwrap_or_else(|e| panic!("exit {}: {e}", e.code));
        for f in outcome.files {
            println!("== {}", f.file_name().unwrap().to_string_lossy());
            print!("{}", std::fs::read_to_string(f).unwrap().lines().take(6).collect::<Vec<_>>().join("\n"));
            println!();
        }
    }
}
