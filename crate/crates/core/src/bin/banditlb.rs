use clap::Parser;

use banditlb::cli::{run, Args};

fn main() {
    let args = Args::parse();
    match run(&args) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("{}", f.display());
            }
            if outcome.checks > 0 {
                eprintln!("all {} checks passed", outcome.checks);
            }
        }
        Err(e) => {
            eprintln!("banditlb: {e}");
            std::process::exit(e.code);
        }
    }
}
