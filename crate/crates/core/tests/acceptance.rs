//! Acceptance gate: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines appear in order on stdout.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use banditlb::bounds::{
    asymptotic_regret, bpr_known_gap, bpr_known_mu_star, collective_bound, distribution_free_opt, small_t_absolute,
};
use banditlb::cli::{self, ExperimentConfig};
use banditlb::models::FIGURE1_MEANS;
use banditlb::sim::{mean_and_stderr, monte_carlo_records};
use banditlb::strategies::StrategySpec;
use banditlb::verify::battery::{
    exact_instances, exact_rows, kinf_instances, kinf_reduction_gap, kinf_rows, CHAIN_RULE_TOL, KINF_ORACLE_TOL,
    KINF_REDUCTION_TOL, SLACK_TOL,
};
use banditlb::verify::grids::{all_grids, library_kl};
use banditlb::{BanditProblem, Distribution, Model};

const SEED: u64 = 20_240_601;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn figure1_run() -> (banditlb::sim::AggregateCurve, Duration) {
    let cfg = ExperimentConfig::figure1(SEED, "unused".into());
    let start = Instant::now();
    let agg = cli::simulate(&cfg).expect("figure1 simulation");
    (agg, start.elapsed())
}

fn criterion_1(agg: &banditlb::sim::AggregateCurve, elapsed: Duration) -> Verdict {
    let nu = BanditProblem::figure1();
    let at = |t: u64| agg.mean_regret[agg.index_of(t).expect("checkpoint on the grid")];
    let k = FIGURE1_MEANS.len() as f64;
    let slope = nu.gaps().iter().sum::<f64>() / k;
    let linear = slope * 200.0;
    let rel = (at(200) - linear).abs() / linear;
    let asym = asymptotic_regret(&nu, 10_000).unwrap();
    let late = (at(10_000) - at(5_000)) / 5_000.0;
    let early = (at(1_000) - at(100)) / 900.0;
    let pass = rel <= 0.25 && at(10_000) < asym && late < early && elapsed <= Duration::from_secs(300);
    verdict(
        pass,
        format!(
            "R(200)={:.3} vs uniform slope {:.3} (rel {:.3} <= 0.25); R(1e4)={:.2} < asymptotic {:.2}; \
             late increment {:.5} < early {:.5}; {:.1}s",
            at(200),
            linear,
            rel,
            at(10_000),
            asym,
            late,
            early,
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_2() -> Verdict {
    let start = Instant::now();
    let instances = exact_instances(false, SEED);
    let mut worst_chain: f64 = 0.0;
    let mut worst_slack = f64::INFINITY;
    let mut randomized = 0;
    let mut all_pass = true;
    for inst in &instances {
        if inst.alphabet == 2 {
            randomized += 1;
        }
        for row in exact_rows(inst).expect("enumeration") {
            all_pass &= row.pass;
            if row.check == "chain_rule_residual" {
                worst_chain = worst_chain.max(row.value);
            } else if row.check.starts_with("fundamental_slack") {
                worst_slack = worst_slack.min(row.value);
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = instances.len() >= 100
        && randomized > 0
        && worst_chain <= CHAIN_RULE_TOL
        && worst_slack >= SLACK_TOL
        && all_pass
        && elapsed <= Duration::from_secs(60);
    verdict(
        pass,
        format!(
            "{} instances ({randomized} with R=2); max chain-rule residual {worst_chain:.2e}; min slack {worst_slack:.3e}; {:.1}s",
            instances.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_3() -> Verdict {
    let reports = all_grids(library_kl);
    let summary: Vec<String> = reports.iter().map(|r| format!("{}={}/{}", r.name, r.violations, r.points)).collect();
    verdict(reports.iter().all(|r| r.violations == 0), summary.join(" "))
}

fn criterion_4() -> Verdict {
    let reduction = kinf_reduction_gap().expect("reduction");
    let mut worst_oracle: f64 = 0.0;
    let mut continuity_ok = true;
    for (i, inst) in kinf_instances(20, SEED).iter().enumerate() {
        for row in kinf_rows(&format!("k-inf-{i}"), inst).expect("k_inf rows") {
            match row.check.as_str() {
                "k_inf_dual_vs_primal_oracle" => worst_oracle = worst_oracle.max(row.value),
                "k_inf_continuity" => continuity_ok &= row.pass,
                _ => {}
            }
        }
    }
    verdict(
        reduction <= KINF_REDUCTION_TOL && worst_oracle <= KINF_ORACLE_TOL && continuity_ok,
        format!(
            "(a) reduction error {reduction:.2e} <= 1e-10; (b) dual vs oracle {worst_oracle:.2e} <= 1e-4; (c) continuity {}",
            if continuity_ok { "holds" } else { "violated" }
        ),
    )
}

fn criterion_5() -> Verdict {
    let df = distribution_free_opt(6, 600).unwrap();
    let v1 = bpr_known_mu_star(0.1, 100).unwrap().count_v1;
    let gap = bpr_known_gap(0.2, 10_000).unwrap();
    let threshold = small_t_absolute(&BanditProblem::figure1(), 1, 1, 6).unwrap().threshold;
    let pass = (df - 3.0).abs() < 1e-12
        && (v1 - 50.0).abs() < 1e-9
        && (gap - 10.85).abs() <= 0.01
        && (threshold - 110.94).abs() <= 0.05;
    verdict(
        pass,
        format!("distribution_free_opt={df}; count_v1={v1:.6}; known_gap={gap:.4}; threshold={threshold:.4}"),
    )
}

fn criterion_6() -> Verdict {
    let start = Instant::now();
    let delta = 0.5f64;
    let nu = BanditProblem::new(
        Model::Gaussian { variance: 1.0 },
        vec![Distribution::gaussian(0.0, 1.0).unwrap(), Distribution::gaussian(-delta, 1.0).unwrap()],
    )
    .unwrap();
    let spec = StrategySpec::KnownMuStar { mu_star: Some(0.0) };
    let records = monte_carlo_records(&nu, &spec, 100_000, 200, SEED, &[50_000, 100_000]).expect("simulation");
    let end: Vec<f64> = records.iter().map(|r| r.regret[1]).collect();
    let diff: Vec<f64> = records.iter().map(|r| r.regret[1] - r.regret[0]).collect();
    let (mean_end, se_end) = mean_and_stderr(&end);
    let (mean_diff, se_diff) = mean_and_stderr(&diff);
    let theorem = 36.0 * (17.0 / delta).ln() / delta + 3.0 * delta;
    let elapsed = start.elapsed();
    let pass = mean_end <= theorem && mean_diff <= 3.0 * se_diff && elapsed <= Duration::from_secs(300);
    verdict(
        pass,
        format!(
            "(a) R(1e5)={mean_end:.2} (se {se_end:.2}) <= {theorem:.2}; (b) R(1e5)-R(5e4)={mean_diff:.3} <= 3*{se_diff:.3}; {:.1}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_7(agg: &banditlb::sim::AggregateCurve) -> Verdict {
    let nu = BanditProblem::figure1();
    let k = nu.arm_count();
    let mut worst = f64::INFINITY;
    let mut checked = 0;
    for (i, &t) in agg.checkpoints.iter().enumerate().filter(|(_, &t)| t <= 100) {
        for a in nu.suboptimal_arms() {
            let bound = small_t_absolute(&nu, a, t, k).unwrap().count.value;
            worst = worst.min(agg.mean_counts[i][a] + 4.0 * agg.count_stderr[i][a] - bound);
            checked += 1;
        }
    }
    let i10 = agg.index_of(10).expect("T=10 checkpoint");
    let collective = collective_bound(&nu, 10).unwrap().regret.value;
    let observed = agg.mean_regret[i10] + 4.0 * agg.stderr[i10];
    verdict(
        worst >= 0.0 && collective <= observed,
        format!(
            "{checked} (T, arm) pairs, min margin {worst:.3}; collective(10)={collective:.4} <= {observed:.4}"
        ),
    )
}

fn csv_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .expect("output dir")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn criterion_8() -> Verdict {
    let root = tempfile::tempdir().unwrap();
    let config = root.path().join("gauss.toml");
    fs::write(
        &config,
        "horizon = 2000\nruns = 40\n\n[problem]\nmodel = \"gaussian\"\nvariance = 1.0\nmeans = [0.0, -0.5]\n\n\
         [strategy]\nid = \"ucb\"\n",
    )
    .unwrap();
    let bin = env!("CARGO_BIN_EXE_banditlb");
    let mut compared = 0;
    let mut mismatched = Vec::new();
    for command in ["bounds", "simulate", "verify", "figure1"] {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let out = root.path().join(format!("{command}-{rep}"));
            let mut cmd = Command::new(bin);
            cmd.arg(command).arg("--out").arg(&out).arg("--seed").arg("11");
            if command != "figure1" {
                cmd.arg("--config").arg(&config);
            }
            if command == "verify" {
                cmd.arg("--quick");
            }
            let status = cmd.output().expect("binary runs").status;
            if !status.success() {
                mismatched.push(format!("{command} exited with {status}"));
            }
            outputs.push(csv_bytes(&out));
        }
        compared += outputs[0].len();
        if outputs[0].is_empty() || outputs[0] != outputs[1] {
            mismatched.push(command.to_string());
        }
    }
    verdict(
        mismatched.is_empty(),
        if mismatched.is_empty() {
            format!("4 commands, {compared} CSV files byte-identical across reruns")
        } else {
            format!("differences: {}", mismatched.join(", "))
        },
    )
}

fn main() {
    let mut failures = 0;
    let mut report = |n: u32, v: Verdict| {
        println!("{} criterion {n}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        if !v.pass {
            failures += 1;
        }
    };
    let (agg, elapsed) = figure1_run();
    report(1, criterion_1(&agg, elapsed));
    report(2, criterion_2());
    report(3, criterion_3());
    report(4, criterion_4());
    report(5, criterion_5());
    report(6, criterion_6());
    report(7, criterion_7(&agg));
    report(8, criterion_8());
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
