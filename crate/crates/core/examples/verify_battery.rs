//! Runs the quick verification battery and summarises it by check.
//!
//!     cargo run --release --example verify_battery

use std::collections::BTreeMap;

use banditlb::verify::{run_battery, VerifyOptions};

fn main() -> banditlb::Result<()> {
    let rows = run_battery(&VerifyOptions { quick: true, ..VerifyOptions::default() })?;
    let mut by_check: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for r in &rows {
        let key = match r.instance_id.split('-').collect::<Vec<_>>().as_slice() {
            ["exact", _, strategy, ..] => format!("exact {strategy}"),
            ["grid", ..] => r.instance_id.clone(),
            _ => r.check.clone(),
        };
        let e = by_check.entry(key).or_default();
        e.0 += 1;
        if r.pass {
            e.1 += 1;
        }
    }
    for (check, (n, ok)) in &by_check {
        println!("{check:<32} {ok:>5}/{n}");
    }
    let failed = rows.iter().filter(|r| !r.pass).count();
    println!("{} rows, {failed} failed", rows.len());
    Ok(())
}
