//! Every lower bound for the six-armed Bernoulli problem on a doubling grid,
//! and the envelope that shows where each one is the best available.
//!
//! The asymptotic curve only binds consistent strategies and the
//! distribution-free curve is a minimax statement, so neither enters the
//! envelope.
//!
//!     cargo run --example bound_curves [OUT_DIR]

use std::fs::File;
use std::path::PathBuf;

use banditlb::bounds::{self, LargeTConstants, DEFAULT_C_PSI};
use banditlb::BanditProblem;

fn main() -> banditlb::Result<()> {
    let nu = BanditProblem::figure1();
    println!("means {:?}", nu.means());
    println!("H = {:.2}, K_max = {:.6}", nu.hardness_h(), nu.k_max()?.value());
    for a in nu.suboptimal_arms() {
        let st = bounds::small_t_absolute(&nu, a, 1, nu.arm_count())?;
        println!("  arm {}: gap {:.3}, K_inf {:.6}, small-T threshold {:.1}", a + 1, nu.gap(a), nu.k_inf_to_best(a)?.value(), st.threshold);
    }

    let mut grid = vec![1];
    grid.extend(bounds::doubling_grid(1 << 62));
    let consts = LargeTConstants::for_problem(&nu, DEFAULT_C_PSI)?;
    let curves = [
        bounds::asymptotic_curve(&nu, &grid)?,
        bounds::collective_curve(&nu, &grid)?,
        bounds::small_t_absolute_curve(&nu, &grid)?,
        bounds::large_t_curve(&nu, &grid, &consts)?,
        bounds::distribution_free_curve(nu.arm_count(), 0.05, &grid)?,
        bounds::envelope(&nu, &grid, &consts)?,
    ];

    println!("\n{:>20} {:>11} {:>11} {:>11} {:>11} {:>11}  envelope", "T", "asymptotic", "collective", "small_t", "large_t", "dist_free");
    for (i, &t) in grid.iter().enumerate().filter(|(i, _)| i % 4 == 0) {
        let env = &curves[5].points[i];
        println!(
            "{t:>20} {:>11.3} {:>11.3} {:>11.3} {:>11.3} {:>11.3}  {:.3} ({})",
            curves[0].points[i].value,
            curves[1].points[i].value,
            curves[2].points[i].value,
            curves[3].points[i].value,
            curves[4].points[i].value,
            env.value,
            env.attained_by.map_or("-", |b| b.as_str()),
        );
    }

    if let Some(dir) = std::env::args().nth(1).map(PathBuf::from) {
        std::fs::create_dir_all(&dir).expect("output directory");
        for c in &curves {
            c.write_csv(File::create(dir.join(format!("bound_{}.csv", c.id))).expect("csv file"))?;
        }
        println!("\nwrote {} CSVs to {}", curves.len(), dir.display());
    }
    Ok(())
}
