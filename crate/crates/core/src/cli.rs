//! Batch front-end behind the `banditlb` binary.
//!
//! An experiment is described by a TOML file:
//!
//! ```toml
//! command = "simulate"      # bounds | simulate | verify | figure1
//! horizon = 10000
//! runs = 200
//! seed = 7
//! out = "out"
//!
//! [problem]
//! model = "bernoulli"       # bernoulli | gaussian | poisson | gamma | binomial | dirac | bounded_support
//! means = [0.5, 0.4, 0.3]   # or a list of [[problem.arms]] tables, or preset = "figure1"
//!
//! [strategy]
//! id = "kl_ucb"
//! ceiling = 1.0
//!
//! [checkpoints]
//! kind = "log"              # log | linear
//! count = 50
//! include = [200, 5000]     # optional extra horizons
//!
//! [bounds]
//! ids = ["asymptotic", "collective"]
//! eps = 0.05
//! grid = [1, 10, 100]       # optional, defaults to the checkpoints
//!
//! [large_t]
//! c_psi = 16.0
//! omega = 4.0               # optional, per-model slope otherwise
//!
//! [verify]
//! quick = false
//! inject_fault = "kl-sign"  # optional negative control
//! ```
//!
//! Model parameters sit next to `model`: `variance` (gaussian), `shape` (gamma),
//! `trials` (binomial) and `ceiling` (bounded_support). An explicit arm is a table
//! tagged by `family`, for example `{ family = "gaussian", mean = 0.0, variance = 1.0 }`.
//!
//! Exit codes: 0 success, 2 configuration error, 3 model or strategy
//! incompatibility, 4 simulation failure, 5 verification failure.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bounds::{self, BoundCurve, BoundId, LargeTConstants, DEFAULT_C_PSI};
use crate::error::Error;
use crate::models::{BanditProblem, Distribution, Model};
use crate::sim::{self, AggregateCurve};
use crate::strategies::StrategySpec;
use crate::verify::battery::write_report;
use crate::verify::grids::{kl_with_flipped_second_term, library_kl};
use crate::verify::{run_battery, ReportRow, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INCOMPATIBLE: i32 = 3;
pub const EXIT_SIMULATION: i32 = 4;
pub const EXIT_VERIFICATION: i32 = 5;

pub const REGRET_CSV: &str = "regret.csv";
pub const COUNTS_CSV: &str = "counts.csv";
pub const BOUND_ARMS_CSV: &str = "bound_arms.csv";
pub const VERIFY_CSV: &str = "verify_report.csv";
pub const PLOT_SCRIPT: &str = "plot_regret.py";

/// File name of the CSV holding one bound curve.
pub fn bound_csv_name(id: BoundId) -> String {
    format!("bound_{id}.csv")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Bounds,
    Simulate,
    Verify,
    Figure1,
}

/// Command-line flags. Flags override the config file.
#[derive(Debug, Clone, Parser)]
#[command(name = "banditlb", version, about = "Regret lower bounds, bandit simulations and exact verification")]
pub struct Args {
    /// Command to run; falls back to `command` in the config.
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// Experiment config (TOML).
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Base seed; run `i` uses `seed + i`.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Smaller verification battery.
    #[arg(long)]
    pub quick: bool,
}

/// A failed command with its exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError { code: EXIT_CONFIG, message: message.into() }
    }

    pub fn incompatible(message: impl Into<String>) -> Self {
        CliError { code: EXIT_INCOMPATIBLE, message: message.into() }
    }

    pub fn simulation(message: impl Into<String>) -> Self {
        CliError { code: EXIT_SIMULATION, message: message.into() }
    }

    pub fn verification(message: impl Into<String>) -> Self {
        CliError { code: EXIT_VERIFICATION, message: message.into() }
    }

    fn io(path: &Path, e: impl fmt::Display) -> Self {
        CliError::simulation(format!("cannot write {}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

// TOML integers are signed 64-bit, so seeds above i64::MAX travel as strings.
mod seed_serde {
    use super::*;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(i64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(seed: &u64, s: S) -> std::result::Result<S::Ok, S::Error> {
        match i64::try_from(*seed) {
            Ok(v) => s.serialize_i64(v),
            Err(_) => s.serialize_str(&seed.to_string()),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<u64, D::Error> {
        use serde::de::Error as _;
        match Raw::deserialize(d)? {
            Raw::Int(v) => u64::try_from(v).map_err(|_| D::Error::custom(format!("seed {v} is negative"))),
            Raw::Text(t) => t.parse().map_err(|_| D::Error::custom(format!("seed `{t}` is not a 64-bit unsigned integer"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Figure1,
}

/// The `[problem]` section.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ceiling: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub means: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub arms: Vec<Distribution>,
}

impl ProblemConfig {
    pub fn figure1() -> Self {
        ProblemConfig { preset: Some(Preset::Figure1), ..Default::default() }
    }

    fn need<T: Copy>(v: Option<T>, key: &str, model: &str) -> Result<T, CliError> {
        v.ok_or_else(|| CliError::config(format!("model `{model}` needs `{key}` in [problem]")))
    }

    pub fn model(&self) -> Result<Model, CliError> {
        let tag = self.model.as_deref().ok_or_else(|| CliError::config("[problem] needs `model` or `preset`"))?;
        Ok(match tag {
            "bernoulli" => Model::Bernoulli,
            "gaussian" => Model::Gaussian { variance: Self::need(self.variance, "variance", tag)? },
            "poisson" => Model::Poisson,
            "gamma" => Model::Gamma { shape: Self::need(self.shape, "shape", tag)? },
            "binomial" => Model::Binomial { trials: Self::need(self.trials, "trials", tag)? },
            "dirac" => Model::Dirac,
            "bounded_support" => Model::BoundedSupport { ceiling: Self::need(self.ceiling, "ceiling", tag)? },
            other => return Err(CliError::config(format!("unknown model `{other}`"))),
        })
    }

    fn arm_from_mean(model: &Model, m: f64) -> Result<Distribution, CliError> {
        let d = match *model {
            Model::Bernoulli => Distribution::bernoulli(m),
            Model::Gaussian { variance } => Distribution::gaussian(m, variance),
            Model::Poisson => Distribution::poisson(m),
            Model::Gamma { shape } => Distribution::gamma(shape, m),
            Model::Binomial { trials } => Distribution::binomial(trials, m),
            Model::Dirac => Distribution::dirac(m),
            Model::BoundedSupport { .. } => {
                return Err(CliError::config("model `bounded_support` needs explicit [[problem.arms]]"))
            }
        };
        d.map_err(|e| CliError::config(format!("[problem] mean {m}: {e}")))
    }

    pub fn build(&self) -> Result<BanditProblem, CliError> {
        if let Some(Preset::Figure1) = self.preset {
            if self.model.is_some() || !self.means.is_empty() || !self.arms.is_empty() {
                return Err(CliError::config("[problem] `preset` excludes `model`, `means` and `arms`"));
            }
            return Ok(BanditProblem::figure1());
        }
        let model = self.model()?;
        let arms = match (self.means.is_empty(), self.arms.is_empty()) {
            (false, true) => self.means.iter().map(|&m| Self::arm_from_mean(&model, m)).collect::<Result<Vec<_>, _>>()?,
            (true, false) => self.arms.clone(),
            _ => return Err(CliError::config("[problem] needs exactly one of `means` and `arms`")),
        };
        BanditProblem::new(model, arms).map_err(|e| CliError::config(format!("[problem]: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckpointKind {
    Log,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointConfig {
    pub kind: CheckpointKind,
    pub count: usize,
    /// Horizons added to the generated grid (those above the horizon are dropped).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub include: Vec<u64>,
}

impl Default for CheckpointConfig {
    fn default() -> Self {
        CheckpointConfig { kind: CheckpointKind::Log, count: 50, include: Vec::new() }
    }
}

impl CheckpointConfig {
    pub fn grid(&self, horizon: u64) -> Vec<u64> {
        let mut grid = match self.kind {
            CheckpointKind::Log => sim::log_checkpoints(horizon, self.count),
            CheckpointKind::Linear => sim::linear_checkpoints(horizon, self.count),
        };
        grid.extend(self.include.iter().copied().filter(|&t| t >= 1 && t <= horizon));
        grid.sort_unstable();
        grid.dedup();
        grid
    }
}

fn default_eps() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    /// Empty means the problem-dependent defaults.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ids: Vec<BoundId>,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<u64>>,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        BoundsConfig { ids: Vec::new(), eps: default_eps(), grid: None }
    }
}

fn default_c_psi() -> f64 {
    DEFAULT_C_PSI
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LargeTConfig {
    #[serde(default = "default_c_psi")]
    pub c_psi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
}

impl Default for LargeTConfig {
    fn default() -> Self {
        LargeTConfig { c_psi: DEFAULT_C_PSI, omega: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fault {
    /// Feeds the grids a `kl` whose second term has the wrong sign.
    #[serde(rename = "kl-sign")]
    KlSign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default)]
    pub quick: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inject_fault: Option<Fault>,
}

fn default_horizon() -> u64 {
    10_000
}

fn default_runs() -> usize {
    100
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_strategy() -> StrategySpec {
    StrategySpec::Thompson
}

/// One experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default = "default_horizon")]
    pub horizon: u64,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default, with = "seed_serde")]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemConfig>,
    #[serde(default = "default_strategy")]
    pub strategy: StrategySpec,
    #[serde(default)]
    pub checkpoints: CheckpointConfig,
    #[serde(default)]
    pub bounds: BoundsConfig,
    #[serde(default)]
    pub large_t: LargeTConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            command: None,
            horizon: default_horizon(),
            runs: default_runs(),
            seed: 0,
            out: default_out(),
            problem: None,
            strategy: default_strategy(),
            checkpoints: CheckpointConfig::default(),
            bounds: BoundsConfig::default(),
            large_t: LargeTConfig::default(),
            verify: VerifyConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::config(format!("config cannot be serialised: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// The fixed flagship experiment: six Bernoulli arms, Thompson sampling,
    /// 500 runs to `T = 10^4` on a log grid.
    pub fn figure1(seed: u64, out: PathBuf) -> Self {
        ExperimentConfig {
            command: Some(Command::Figure1),
            horizon: 10_000,
            runs: 500,
            seed,
            out,
            problem: Some(ProblemConfig::figure1()),
            strategy: StrategySpec::Thompson,
            checkpoints: CheckpointConfig {
                kind: CheckpointKind::Log,
                count: 60,
                include: vec![10, 100, 200, 1_000, 5_000],
            },
            bounds: BoundsConfig {
                ids: vec![BoundId::Asymptotic, BoundId::Collective, BoundId::SmallTAbsolute, BoundId::LargeT],
                ..BoundsConfig::default()
            },
            large_t: LargeTConfig::default(),
            verify: VerifyConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.horizon < 1 {
            return Err(CliError::config("horizon must be at least 1"));
        }
        if self.runs < 1 {
            return Err(CliError::config("runs must be at least 1"));
        }
        if self.checkpoints.count < 1 {
            return Err(CliError::config("[checkpoints] count must be at least 1"));
        }
        if !(self.bounds.eps > 0.0 && self.bounds.eps < 0.5) {
            return Err(CliError::config(format!("[bounds] eps = {} outside (0, 1/2)", self.bounds.eps)));
        }
        if let Some(grid) = &self.bounds.grid {
            if grid.is_empty() || grid[0] == 0 || grid.windows(2).any(|w| w[0] >= w[1]) {
                return Err(CliError::config("[bounds] grid must be non-empty, positive and strictly increasing"));
            }
        }
        if !(self.large_t.c_psi.is_finite() && self.large_t.c_psi > 0.0) {
            return Err(CliError::config("[large_t] c_psi must be positive"));
        }
        if let Some(w) = self.large_t.omega {
            if !(w.is_finite() && w >= 0.0) {
                return Err(CliError::config("[large_t] omega must be non-negative"));
            }
        }
        Ok(())
    }

    fn problem(&self) -> Result<BanditProblem, CliError> {
        self.problem.as_ref().ok_or_else(|| CliError::config("this command needs a [problem] section"))?.build()
    }

    fn bound_grid(&self) -> Vec<u64> {
        self.bounds.grid.clone().unwrap_or_else(|| self.checkpoints.grid(self.horizon))
    }
}

/// Files written by a command, plus the verification summary.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub checks: usize,
}

/// Writes `name` inside `dir` through a temporary file and a rename.
fn write_atomic<F>(dir: &Path, name: &str, fill: F) -> Result<PathBuf, CliError>
where
    F: FnOnce(&mut dyn Write) -> Result<(), Error>,
{
    let path = dir.join(name);
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(&path, e))?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        fill(&mut w).map_err(|e| CliError::io(&path, e))?;
        w.flush().map_err(|e| CliError::io(&path, e))?;
    }
    tmp.persist(&path).map_err(|e| CliError::io(&path, e.error))?;
    Ok(path)
}

fn prepare_out(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::config(format!("cannot create {}: {e}", dir.display())))
}

/// Resolves flags against the config file.
pub fn resolve(args: &Args) -> Result<(Command, ExperimentConfig), CliError> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let command = args
        .command
        .or(cfg.command)
        .ok_or_else(|| CliError::config("no command given (bounds, simulate, verify or figure1)"))?;
    if command == Command::Figure1 {
        cfg = ExperimentConfig::figure1(cfg.seed, cfg.out);
    }
    cfg.command = Some(command);
    if let Some(out) = &args.out {
        cfg.out = out.clone();
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if args.quick {
        cfg.verify.quick = true;
    }
    Ok((command, cfg))
}

/// Runs one parsed command line.
pub fn run(args: &Args) -> Result<Outcome, CliError> {
    let (command, cfg) = resolve(args)?;
    run_config(command, &cfg)
}

pub fn run_config(command: Command, cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    match command {
        Command::Bounds => cmd_bounds(cfg),
        Command::Simulate => cmd_simulate(cfg),
        Command::Verify => cmd_verify(cfg),
        Command::Figure1 => {
            let mut out = cmd_bounds(cfg)?;
            out.files.extend(cmd_simulate(cfg)?.files);
            Ok(out)
        }
    }
}

fn default_bound_ids(nu: &BanditProblem) -> Vec<BoundId> {
    let mut ids = vec![BoundId::Asymptotic, BoundId::Collective, BoundId::SmallTAbsolute, BoundId::SmallTRelative];
    if nu.suboptimal_arms().iter().all(|&a| nu.k_inf_to_best(a).map(|k| k.is_finite()).unwrap_or(false)) {
        ids.push(BoundId::LargeT);
    }
    if bounds::two_armed_unit_gaussian_gap(nu).is_ok() {
        ids.extend([BoundId::BprKnownMuStar, BoundId::BprKnownGap]);
    }
    ids
}

fn large_t_constants(nu: &BanditProblem, cfg: &LargeTConfig) -> Result<LargeTConstants, Error> {
    match cfg.omega {
        Some(w) => LargeTConstants::uniform(nu, cfg.c_psi, w),
        None => LargeTConstants::for_problem(nu, cfg.c_psi),
    }
}

/// One bound curve over `grid`.
pub fn bound_curve(id: BoundId, nu: &BanditProblem, grid: &[u64], cfg: &ExperimentConfig) -> Result<BoundCurve, CliError> {
    let k = nu.arm_count();
    let curve = match id {
        BoundId::Asymptotic => bounds::asymptotic_curve(nu, grid),
        BoundId::DistributionFree => bounds::distribution_free_curve(k, cfg.bounds.eps, grid),
        BoundId::DistributionFreeOpt => bounds::distribution_free_opt_curve(k, grid),
        BoundId::BprKnownMuStar => {
            bounds::two_armed_unit_gaussian_gap(nu).and_then(|d| bounds::bpr_known_mu_star_curve(d, grid))
        }
        BoundId::BprKnownGap => bounds::two_armed_unit_gaussian_gap(nu).and_then(|d| bounds::bpr_known_gap_curve(d, grid)),
        BoundId::SmallTAbsolute => bounds::small_t_absolute_curve(nu, grid),
        BoundId::SmallTRelative => bounds::small_t_relative_curve(nu, grid),
        BoundId::Collective => bounds::collective_curve(nu, grid),
        BoundId::LargeT => large_t_constants(nu, &cfg.large_t).and_then(|c| bounds::large_t_curve(nu, grid, &c)),
        BoundId::Envelope => large_t_constants(nu, &cfg.large_t).and_then(|c| bounds::envelope(nu, grid, &c)),
    };
    curve.map_err(|e| CliError::incompatible(format!("bound `{id}`: {e}")))
}

/// Per-arm pull-count bounds and their regret contributions.
fn write_bound_arms(w: &mut dyn Write, nu: &BanditProblem, grid: &[u64], ids: &[BoundId]) -> Result<(), Error> {
    let mut csv = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::Contract(format!("csv write failed: {e}"));
    csv.write_record(["bound_id", "T", "arm", "count", "regret"]).map_err(io)?;
    for &id in ids {
        for &t in grid {
            for a in nu.suboptimal_arms() {
                let count = match id {
                    BoundId::Asymptotic => bounds::asymptotic_count(nu, a, t)?,
                    BoundId::SmallTAbsolute => bounds::small_t_absolute(nu, a, t, nu.arm_count())?.count.value,
                    _ => continue,
                };
                csv.write_record([
                    id.as_str(),
                    &t.to_string(),
                    &(a + 1).to_string(),
                    &count.to_string(),
                    &(nu.gap(a) * count).to_string(),
                ])
                .map_err(io)?;
            }
        }
    }
    csv.flush().map_err(|e| Error::Contract(format!("csv flush failed: {e}")))
}

/// One CSV per requested bound, the envelope, and the per-arm table.
pub fn cmd_bounds(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let nu = cfg.problem()?;
    let grid = cfg.bound_grid();
    let mut ids = if cfg.bounds.ids.is_empty() { default_bound_ids(&nu) } else { cfg.bounds.ids.clone() };
    ids.retain(|&id| id != BoundId::Envelope);
    ids.push(BoundId::Envelope);
    let mut seen = Vec::new();
    ids.retain(|id| {
        let fresh = !seen.contains(id);
        seen.push(*id);
        fresh
    });

    let curves = ids.iter().map(|&id| bound_curve(id, &nu, &grid, cfg)).collect::<Result<Vec<_>, _>>()?;
    prepare_out(&cfg.out)?;
    let mut out = Outcome::default();
    for curve in &curves {
        out.files.push(write_atomic(&cfg.out, &bound_csv_name(curve.id), |w| curve.write_csv(w))?);
    }
    out.files.push(write_atomic(&cfg.out, BOUND_ARMS_CSV, |w| write_bound_arms(w, &nu, &grid, &ids))?);
    Ok(out)
}

/// Runs the Monte Carlo batch; the aggregate is also returned to library callers.
pub fn simulate(cfg: &ExperimentConfig) -> Result<AggregateCurve, CliError> {
    let nu = cfg.problem()?;
    cfg.strategy
        .check_compatible(&nu)
        .map_err(|e| CliError::incompatible(format!("strategy `{}`: {e}", cfg.strategy.id())))?;
    let checkpoints = cfg.checkpoints.grid(cfg.horizon);
    sim::monte_carlo(&nu, &cfg.strategy, cfg.horizon, cfg.runs, cfg.seed, &checkpoints).map_err(|e| match e {
        Error::RunFailed { run, source } => CliError::simulation(format!("run {run} (seed {}): {source}", cfg.seed.wrapping_add(run as u64))),
        other => CliError::simulation(other.to_string()),
    })
}

/// Regret and count CSVs plus the plot script.
pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let agg = simulate(cfg)?;
    prepare_out(&cfg.out)?;
    let mut out = Outcome::default();
    out.files.push(write_atomic(&cfg.out, REGRET_CSV, |w| agg.write_csv(w))?);
    out.files.push(write_atomic(&cfg.out, COUNTS_CSV, |w| agg.write_counts_csv(w))?);
    out.files.push(write_atomic(&cfg.out, PLOT_SCRIPT, |w| {
        w.write_all(plot_script(cfg).as_bytes()).map_err(|e| Error::Contract(e.to_string()))
    })?);
    Ok(out)
}

/// Runs the verification battery; exit code 5 when any row fails.
pub fn cmd_verify(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let opts = VerifyOptions {
        quick: cfg.verify.quick,
        seed: cfg.seed,
        kl: match cfg.verify.inject_fault {
            Some(Fault::KlSign) => kl_with_flipped_second_term,
            None => library_kl,
        },
    };
    let rows = run_battery(&opts).map_err(|e| CliError::verification(format!("battery aborted: {e}")))?;
    prepare_out(&cfg.out)?;
    let path = write_atomic(&cfg.out, VERIFY_CSV, |w| write_report(&rows, w))?;
    let failed: Vec<&ReportRow> = rows.iter().filter(|r| !r.pass).collect();
    if !failed.is_empty() {
        let first: Vec<String> = failed.iter().take(5).map(|r| format!("{} {}", r.instance_id, r.check)).collect();
        return Err(CliError::verification(format!(
            "{} of {} checks failed (first: {}); see {}",
            failed.len(),
            rows.len(),
            first.join(", "),
            path.display()
        )));
    }
    Ok(Outcome { files: vec![path], checks: rows.len() })
}

/// A matplotlib script that draws `regret.csv` with a 2-stderr band and
/// every `bound_*.csv` found next to it.
pub fn plot_script(cfg: &ExperimentConfig) -> String {
    let title = format!("{} on {} arms, {} runs", cfg.strategy.id(), problem_label(cfg), cfg.runs);
    format!(
        r#"#!/usr/bin/env python3
import csv
import glob
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))


def read(name):
    with open(os.path.join(HERE, name), newline="") as f:
        return list(csv.DictReader(f))


rows = read("{regret}")
t = [int(r["T"]) for r in rows]
mean = [float(r["mean_regret"]) for r in rows]
err = [2.0 * float(r["stderr"]) for r in rows]

fig, ax = plt.subplots(figsize=(7, 4.5))
ax.plot(t, mean, color="black", label="mean regret")
ax.fill_between(t, [m - e for m, e in zip(mean, err)], [m + e for m, e in zip(mean, err)], color="grey", alpha=0.3)

for path in sorted(glob.glob(os.path.join(HERE, "bound_*.csv"))):
    name = os.path.basename(path)
    if name == "{arms}":
        continue
    bound = read(name)
    bt = [int(r["T"]) for r in bound]
    bv = [float(r["value"]) for r in bound]
    ax.plot(bt, bv, linestyle="--", label=bound[0]["bound_id"] if bound else name)

ax.set_xscale("log")
ax.set_xlabel("T")
ax.set_ylabel("regret")
ax.set_title("{title}")
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(HERE, "regret.png"), dpi=150)
"#,
        regret = REGRET_CSV,
        arms = BOUND_ARMS_CSV,
        title = title,
    )
}

fn problem_label(cfg: &ExperimentConfig) -> String {
    cfg.problem
        .as_ref()
        .and_then(|p| p.build().ok())
        .map_or_else(|| "?".into(), |nu| format!("{} {}", nu.arm_count(), nu.model().name()))
}
