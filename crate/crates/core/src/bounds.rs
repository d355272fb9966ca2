//! Regret and pull-count lower bounds, each evaluated as a curve over `T`.
//!
//! Count bounds are turned into regret through `R = sum_a gap_a E[N_a(T)]`.
//! A bound that comes out negative (or `-inf`) carries no information; it is
//! reported as 0 with its `void` flag set.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::divergence::{bernoulli_kl, lambert_w, ExtNonNeg};
use crate::error::{Error, Result};
use crate::models::{kl_div, BanditProblem, Model};

/// Identifiers of the bound families, as used in configs and CSV files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundId {
    Asymptotic,
    DistributionFree,
    DistributionFreeOpt,
    BprKnownMuStar,
    BprKnownGap,
    SmallTAbsolute,
    SmallTRelative,
    Collective,
    LargeT,
    Envelope,
}

impl BoundId {
    pub const ALL: [BoundId; 10] = [
        BoundId::Asymptotic,
        BoundId::DistributionFree,
        BoundId::DistributionFreeOpt,
        BoundId::BprKnownMuStar,
        BoundId::BprKnownGap,
        BoundId::SmallTAbsolute,
        BoundId::SmallTRelative,
        BoundId::Collective,
        BoundId::LargeT,
        BoundId::Envelope,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundId::Asymptotic => "asymptotic",
            BoundId::DistributionFree => "distribution_free",
            BoundId::DistributionFreeOpt => "distribution_free_opt",
            BoundId::BprKnownMuStar => "bpr_known_mu_star",
            BoundId::BprKnownGap => "bpr_known_gap",
            BoundId::SmallTAbsolute => "small_t_absolute",
            BoundId::SmallTRelative => "small_t_relative",
            BoundId::Collective => "collective",
            BoundId::LargeT => "large_t",
            BoundId::Envelope => "envelope",
        }
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::domain(format!("unknown bound id `{s}`")))
    }
}

/// A bound value after clamping: `raw` is what the formula gave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundValue {
    pub value: f64,
    pub raw: f64,
    pub void: bool,
}

impl BoundValue {
    pub fn clamp(raw: f64) -> Self {
        if raw >= 0.0 && raw.is_finite() {
            BoundValue { value: raw, raw, void: false }
        } else {
            BoundValue { value: 0.0, raw, void: true }
        }
    }

    fn scaled(self, factor: f64) -> Self {
        BoundValue { value: self.value * factor, raw: self.raw * factor, void: self.void }
    }
}

/// One point of a curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundPoint {
    pub t: u64,
    pub value: f64,
    pub void: bool,
    /// Which bound realised the maximum (envelope only).
    pub attained_by: Option<BoundId>,
}

/// A bound evaluated over an increasing grid of horizons.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCurve {
    pub id: BoundId,
    /// Human-readable record of the inputs, e.g. `"K=6, eps=0.05"`.
    pub params: String,
    pub points: Vec<BoundPoint>,
}

impl BoundCurve {
    fn build(id: BoundId, params: String, grid: &[u64], mut f: impl FnMut(u64) -> Result<BoundValue>) -> Result<Self> {
        check_grid(grid)?;
        let points = grid
            .iter()
            .map(|&t| {
                let v = f(t)?;
                Ok(BoundPoint { t, value: v.value, void: v.void, attained_by: None })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BoundCurve { id, params, points })
    }

    pub fn value_at(&self, t: u64) -> Option<f64> {
        self.points.iter().find(|p| p.t == t).map(|p| p.value)
    }

    /// Writes `bound_id,T,value,void,attained_by`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Contract(format!("csv write failed: {e}"));
        w.write_record(["bound_id", "T", "value", "void", "attained_by"]).map_err(io)?;
        for p in &self.points {
            w.write_record([
                self.id.as_str(),
                &p.t.to_string(),
                &p.value.to_string(),
                if p.void { "true" } else { "false" },
                p.attained_by.map_or("", BoundId::as_str),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Contract(format!("csv flush failed: {e}")))
    }
}

fn check_grid(grid: &[u64]) -> Result<()> {
    if grid.is_empty() || grid[0] == 0 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::precondition("T grid must be non-empty, positive and strictly increasing"));
    }
    Ok(())
}

/// `2, 4, 8, ...` up to `t_max`.
pub fn doubling_grid(t_max: u64) -> Vec<u64> {
    std::iter::successors(Some(2u64), |&t| t.checked_mul(2)).take_while(|&t| t <= t_max).collect()
}

fn k_inf_to_best(nu: &BanditProblem, a: usize) -> Result<ExtNonNeg> {
    nu.k_inf_to_best(a)
}

/// `ln T / K_inf(nu_a, mu*)` for a suboptimal arm; 0 for optimal arms and
/// when `K_inf` is infinite.
pub fn asymptotic_count(nu: &BanditProblem, a: usize, t: u64) -> Result<f64> {
    if nu.is_optimal(a) {
        nu.check_arm(a)?;
        return Ok(0.0);
    }
    let k = k_inf_to_best(nu, a)?;
    Ok(if k.is_finite() && k.value() > 0.0 { (t as f64).ln() / k.value() } else { 0.0 })
}

/// `sum_a gap_a ln T / K_inf(nu_a, mu*)`.
pub fn asymptotic_regret(nu: &BanditProblem, t: u64) -> Result<f64> {
    let mut total = 0.0;
    for a in nu.suboptimal_arms() {
        total += nu.gap(a) * asymptotic_count(nu, a, t)?;
    }
    Ok(total)
}

pub fn asymptotic_curve(nu: &BanditProblem, grid: &[u64]) -> Result<BoundCurve> {
    BoundCurve::build(BoundId::Asymptotic, format!("K={}", nu.arm_count()), grid, |t| {
        Ok(BoundValue::clamp(asymptotic_regret(nu, t)?))
    })
}

fn check_k(k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::domain(format!("need K >= 2 arms, got {k}")));
    }
    Ok(())
}

/// `T eps (1 - 1/K - (1/2) sqrt((T/K) ln(1/(1 - 4 eps^2))))`, unclamped.
pub fn distribution_free_bound(k: usize, t: u64, eps: f64) -> Result<f64> {
    check_k(k)?;
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::domain(format!("eps = {eps} outside (0, 1/2)")));
    }
    let (t, kf) = (t as f64, k as f64);
    let info = (1.0 / (1.0 - 4.0 * eps * eps)).ln();
    Ok(t * eps * (1.0 - 1.0 / kf - 0.5 * ((t / kf) * info).sqrt()))
}

/// `(1/20) min{sqrt(K T), T}`.
pub fn distribution_free_opt(k: usize, t: u64) -> Result<f64> {
    check_k(k)?;
    let t = t as f64;
    Ok(((k as f64) * t).sqrt().min(t) / 20.0)
}

pub fn distribution_free_curve(k: usize, eps: f64, grid: &[u64]) -> Result<BoundCurve> {
    BoundCurve::build(BoundId::DistributionFree, format!("K={k}, eps={eps}"), grid, |t| {
        Ok(BoundValue::clamp(distribution_free_bound(k, t, eps)?))
    })
}

pub fn distribution_free_opt_curve(k: usize, grid: &[u64]) -> Result<BoundCurve> {
    BoundCurve::build(BoundId::DistributionFreeOpt, format!("K={k}"), grid, |t| {
        Ok(BoundValue::clamp(distribution_free_opt(k, t)?))
    })
}

/// Both forms of the known-`mu*` bound for `(N(0,1), N(-gap,1))`.
///
/// The first form needs `E[N_1] = E[N_2]` on two identical arms; the second
/// holds for any strategy once `E[N_2(T)] >= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnownMuStarBound {
    pub count_v1: f64,
    pub regret_v1: f64,
    pub count_v2: f64,
    pub regret_v2: f64,
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::domain(format!("gap {delta} must be positive and finite")));
    }
    Ok(())
}

pub fn bpr_known_mu_star(delta: f64, t: u64) -> Result<KnownMuStarBound> {
    check_delta(delta)?;
    let tf = t as f64;
    let count_v1 = 1.0 / (delta * delta + 1.0 / tf);
    let count_v2 = (2.0 * std::f64::consts::LN_2 / (delta * delta + 2.0 * (4.0 * tf).ln() / tf)).min(tf / 2.0);
    Ok(KnownMuStarBound { count_v1, regret_v1: delta * count_v1, count_v2, regret_v2: delta * count_v2 })
}

/// `min{W(T gap^2 / 1.2) / (2 gap), T gap / 2}`.
pub fn bpr_known_gap(delta: f64, t: u64) -> Result<f64> {
    check_delta(delta)?;
    let tf = t as f64;
    let w = lambert_w(tf * delta * delta / 1.2)?;
    Ok((w / (2.0 * delta)).min(tf * delta / 2.0))
}

/// The two-armed unit-variance Gaussian problems the known-`mu*` and
/// known-gap bounds are stated for; returns the gap.
pub fn two_armed_unit_gaussian_gap(nu: &BanditProblem) -> Result<f64> {
    if nu.model() != &(Model::Gaussian { variance: 1.0 }) || nu.arm_count() != 2 {
        return Err(Error::ModelMismatch(
            "needs a two-armed Gaussian problem with variance 1".into(),
        ));
    }
    nu.min_gap().ok_or_else(|| Error::ModelMismatch("needs a suboptimal arm (gap > 0)".into()))
}

pub fn bpr_known_mu_star_curve(delta: f64, grid: &[u64]) -> Result<BoundCurve> {
    BoundCurve::build(BoundId::BprKnownMuStar, format!("delta={delta}"), grid, |t| {
        Ok(BoundValue::clamp(bpr_known_mu_star(delta, t)?.regret_v1))
    })
}

pub fn bpr_known_gap_curve(delta: f64, grid: &[u64]) -> Result<BoundCurve> {
    BoundCurve::build(BoundId::BprKnownGap, format!("delta={delta}"), grid, |t| {
        Ok(BoundValue::clamp(bpr_known_gap(delta, t)?))
    })
}

/// Pull-count bound for strategies smarter than uniform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallTAbsolute {
    pub count: BoundValue,
    /// Horizon `1 / (8 K_inf)` below which `E[N_a(T)] >= T/(2K)`.
    pub threshold: f64,
}

/// `(T/K)(1 - sqrt(2 T K_inf(nu_a, mu*)))`.
pub fn small_t_absolute(nu: &BanditProblem, a: usize, t: u64, k: usize) -> Result<SmallTAbsolute> {
    check_k(k)?;
    let kinf = k_inf_to_best(nu, a)?;
    let tf = t as f64;
    let raw = if kinf.is_infinite() {
        if t == 0 {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    } else {
        (tf / k as f64) * (1.0 - (2.0 * tf * kinf.value()).sqrt())
    };
    let threshold = if kinf.value() == 0.0 { f64::INFINITY } else { 1.0 / (8.0 * kinf.value()) };
    Ok(SmallTAbsolute { count: BoundValue::clamp(raw), threshold })
}

/// `sum over suboptimal a of gap_a * small_t_absolute(nu, a, T, K)` with `K` the arm count.
pub fn small_t_absolute_regret(nu: &BanditProblem, t: u64) -> Result<BoundValue> {
    let k = nu.arm_count();
    let mut total = 0.0;
    let mut void = true;
    for a in nu.suboptimal_arms() {
        let b = small_t_absolute(nu, a, t, k)?;
        total += nu.gap(a) * b.count.value;
        void &= b.count.void;
    }
    Ok(BoundValue { value: total, raw: total, void: void && !nu.suboptimal_arms().is_empty() })
}

pub fn small_t_absolute_curve(nu: &BanditProblem, grid: &[u64]) -> Result<BoundCurve> {
    BoundCurve::build(BoundId::SmallTAbsolute, format!("K={}", nu.arm_count()), grid, |t| {
        small_t_absolute_regret(nu, t)
    })
}

/// Bound for pairwise-symmetric strategies: either `E[N_a*] < T/K`
/// (`first_branch_threshold`), or `E[max(N_a,1)/max(N_a*,1)]` is at least `ratio`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallTRelative {
    pub ratio: BoundValue,
    pub first_branch_threshold: f64,
}

/// `1 - 2 sqrt(2 T KL(nu_a, nu_a*) / K)`.
pub fn small_t_relative(nu: &BanditProblem, a: usize, a_star: usize, t: u64, k: usize) -> Result<SmallTRelative> {
    check_k(k)?;
    nu.check_arm(a)?;
    nu.check_arm(a_star)?;
    if !nu.is_optimal(a_star) {
        return Err(Error::precondition(format!("arm {a_star} is not optimal")));
    }
    let kl = kl_div(nu.arm(a), nu.arm(a_star))?;
    let tf = t as f64;
    let raw = if t == 0 {
        1.0
    } else if kl.is_infinite() {
        f64::NEG_INFINITY
    } else {
        1.0 - 2.0 * (2.0 * tf * kl.value() / k as f64).sqrt()
    };
    Ok(SmallTRelative { ratio: BoundValue::clamp(raw), first_branch_threshold: tf / k as f64 })
}

/// The curve pairs the suboptimal arm with the smallest gap with the first
/// optimal arm.
pub fn small_t_relative_curve(nu: &BanditProblem, grid: &[u64]) -> Result<BoundCurve> {
    let a = nu
        .suboptimal_arms()
        .into_iter()
        .min_by(|&x, &y| nu.gap(x).total_cmp(&nu.gap(y)))
        .ok_or_else(|| Error::ModelMismatch("needs a suboptimal arm".into()))?;
    let a_star = nu.optimal_arms()[0];
    let k = nu.arm_count();
    BoundCurve::build(
        BoundId::SmallTRelative,
        format!("arm={}, optimal_arm={}, K={k}", a + 1, a_star + 1),
        grid,
        |t| Ok(small_t_relative(nu, a, a_star, t, k)?.ratio),
    )
}

/// Count and regret bound for strategies that are smarter than uniform,
/// pairwise symmetric and monotonic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollectiveBound {
    pub count: BoundValue,
    pub regret: BoundValue,
}

/// `T (1 - A*/K - A* sqrt(2 T K_max)/K - 2 A* T K_max / K)`, regret scaled by the smallest gap.
pub fn collective_bound(nu: &BanditProblem, t: u64) -> Result<CollectiveBound> {
    let k = nu.arm_count() as f64;
    let a_star = nu.optimal_arms().len() as f64;
    let kmax = nu.k_max()?;
    let tf = t as f64;
    let raw = if t == 0 {
        0.0
    } else if kmax.is_infinite() {
        f64::NEG_INFINITY
    } else {
        let km = kmax.value();
        tf * (1.0 - a_star / k - a_star * (2.0 * tf * km).sqrt() / k - 2.0 * a_star * tf * km / k)
    };
    let count = BoundValue::clamp(raw);
    let regret = count.scaled(nu.min_gap().unwrap_or(0.0));
    Ok(CollectiveBound { count, regret })
}

pub fn collective_curve(nu: &BanditProblem, grid: &[u64]) -> Result<BoundCurve> {
    BoundCurve::build(BoundId::Collective, format!("K={}", nu.arm_count()), grid, |t| {
        Ok(collective_bound(nu, t)?.regret)
    })
}

/// Constants of the large-`T` bound: the super-consistency constant and the
/// per-arm continuity slope `omega` (0 for optimal arms).
#[derive(Debug, Clone, PartialEq)]
pub struct LargeTConstants {
    pub c_psi: f64,
    pub omega: Vec<f64>,
}

/// Conventional super-consistency constant for index policies.
pub const DEFAULT_C_PSI: f64 = 16.0;

impl LargeTConstants {
    /// `omega` from the model's continuity slope at `mu*`.
    pub fn for_problem(nu: &BanditProblem, c_psi: f64) -> Result<Self> {
        if !(c_psi.is_finite() && c_psi > 0.0) {
            return Err(Error::domain(format!("c_psi = {c_psi} must be positive")));
        }
        let omega = (0..nu.arm_count())
            .map(|a| {
                if nu.is_optimal(a) {
                    Ok(0.0)
                } else {
                    nu.model().continuity_slope(nu.arm(a), nu.mu_star())
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LargeTConstants { c_psi, omega })
    }

    /// Same `omega` for every suboptimal arm.
    pub fn uniform(nu: &BanditProblem, c_psi: f64, omega: f64) -> Result<Self> {
        if !(c_psi.is_finite() && c_psi > 0.0 && omega.is_finite() && omega >= 0.0) {
            return Err(Error::domain(format!("need c_psi > 0 and omega >= 0, got ({c_psi}, {omega})")));
        }
        let omega = (0..nu.arm_count()).map(|a| if nu.is_optimal(a) { 0.0 } else { omega }).collect();
        Ok(LargeTConstants { c_psi, omega })
    }
}

/// Large-`T` bound on `E[N_a(T)]` for super-consistent strategies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LargeTBound {
    pub count: BoundValue,
    pub a_t: f64,
    pub b_t: f64,
    pub c_t: f64,
    /// True when `a_T`, `b_T` and `c_T` are all below 1 and `eps_T` is inside
    /// the model's continuity range.
    pub applicable: bool,
}

/// `ln T / K_inf - (a_T + b_T + c_T) ln T - ln 2 / K_inf` with `eps_T = (ln T)^-4`.
pub fn large_t_bound(nu: &BanditProblem, a: usize, t: u64, consts: &LargeTConstants) -> Result<LargeTBound> {
    if t < 2 {
        return Err(Error::domain(format!("large_t_bound needs T >= 2, got {t}")));
    }
    nu.check_arm(a)?;
    if consts.omega.len() != nu.arm_count() {
        return Err(Error::precondition("one omega per arm is required"));
    }
    let kinf = k_inf_to_best(nu, a)?;
    if !(kinf.is_finite() && kinf.value() > 0.0) {
        return Err(Error::precondition(format!(
            "K_inf(nu_{}, mu*) = {kinf} is not in (0, inf)",
            a + 1
        )));
    }
    let k = kinf.value();
    let ln_t = (t as f64).ln();
    let c = consts.c_psi;
    let a_t = consts.omega[a] / k * ln_t.powi(-4);
    let b_t = c * nu.hardness_h() * ln_t / t as f64;
    let c_t = (nu.arm_count() as f64 * c * ln_t.powi(9)).ln() / ln_t;
    let raw = ln_t / k - (a_t + b_t + c_t) * ln_t - std::f64::consts::LN_2 / k;
    let eps_ok = nu
        .model()
        .continuity_eps_limit(nu.mu_star())
        .map(|limit| ln_t.powi(-4) < limit)
        .unwrap_or(false);
    let applicable = a_t < 1.0 && b_t < 1.0 && c_t < 1.0 && eps_ok;
    Ok(LargeTBound { count: BoundValue::clamp(raw), a_t, b_t, c_t, applicable })
}

/// `sum over suboptimal arms of gap_a * large_t_bound` over the applicable
/// arms; void when none applies.
pub fn large_t_regret(nu: &BanditProblem, t: u64, consts: &LargeTConstants) -> Result<BoundValue> {
    let mut total = 0.0;
    let mut any = false;
    if t >= 2 {
        for a in nu.suboptimal_arms() {
            let b = large_t_bound(nu, a, t, consts)?;
            if b.applicable {
                total += nu.gap(a) * b.count.value;
                any = true;
            }
        }
    }
    Ok(if any { BoundValue::clamp(total) } else { BoundValue { value: 0.0, raw: 0.0, void: true } })
}

pub fn large_t_curve(nu: &BanditProblem, grid: &[u64], consts: &LargeTConstants) -> Result<BoundCurve> {
    BoundCurve::build(BoundId::LargeT, format!("c_psi={}", consts.c_psi), grid, |t| {
        large_t_regret(nu, t, consts)
    })
}

/// Pointwise maximum of the collective, small-`T` absolute and applicable
/// large-`T` regret bounds (and 0), tagged with the bound that attains it.
pub fn envelope(nu: &BanditProblem, grid: &[u64], consts: &LargeTConstants) -> Result<BoundCurve> {
    check_grid(grid)?;
    let large_t_ok = nu.suboptimal_arms().iter().all(|&a| {
        nu.k_inf_to_best(a).map(|k| k.is_finite() && k.value() > 0.0).unwrap_or(false)
    });
    let mut points = Vec::with_capacity(grid.len());
    for &t in grid {
        let mut best = (0.0, None);
        let mut consider = |id: BoundId, v: BoundValue| {
            if !v.void && v.value > best.0 {
                best = (v.value, Some(id));
            }
        };
        consider(BoundId::Collective, collective_bound(nu, t)?.regret);
        consider(BoundId::SmallTAbsolute, small_t_absolute_regret(nu, t)?);
        if large_t_ok {
            consider(BoundId::LargeT, large_t_regret(nu, t, consts)?);
        }
        points.push(BoundPoint { t, value: best.0, void: best.1.is_none(), attained_by: best.1 });
    }
    Ok(BoundCurve { id: BoundId::Envelope, params: format!("c_psi={}", consts.c_psi), points })
}

/// Residual of `2 T gap^2 x = ln(1 / (2.4 x))` at `x = W(T gap^2/1.2) / (2 T gap^2)`,
/// the equation that defines the known-gap bound.
pub fn known_gap_defining_residual(delta: f64, t: u64) -> Result<f64> {
    check_delta(delta)?;
    let s = t as f64 * delta * delta;
    let x = lambert_w(s / 1.2)? / (2.0 * s);
    Ok(2.0 * s * x - (1.0 / (2.4 * x)).ln())
}

/// Bernoulli `kl` between the two parameters of the distribution-free
/// construction, `(1/2) ln(1/(1 - 4 eps^2))`.
pub fn distribution_free_information(eps: f64) -> Result<f64> {
    Ok(bernoulli_kl(0.5, 0.5 + eps)?.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Distribution;
    use approx::assert_abs_diff_eq;

    fn gaussian_pair(delta: f64) -> BanditProblem {
        BanditProblem::new(
            Model::Gaussian { variance: 1.0 },
            vec![Distribution::gaussian(0.0, 1.0).unwrap(), Distribution::gaussian(-delta, 1.0).unwrap()],
        )
        .unwrap()
    }

    #[test]
    fn ids_round_trip() {
        for id in BoundId::ALL {
            assert_eq!(id.as_str().parse::<BoundId>().unwrap(), id);
        }
        assert!("bogus".parse::<BoundId>().is_err());
    }

    #[test]
    fn asymptotic_values() {
        let nu = BanditProblem::figure1();
        assert_eq!(asymptotic_regret(&nu, 1).unwrap(), 0.0);
        // ln(1e6) / 0.0011267058200351975 = 12261.86...
        let count = asymptotic_count(&nu, 1, 1_000_000).unwrap();
        assert_abs_diff_eq!(count, 12_261.86, epsilon = 0.05);
        assert_abs_diff_eq!(0.01 * count, 122.6, epsilon = 0.5);
        let dirac = BanditProblem::new(
            Model::Dirac,
            vec![Distribution::dirac(1.0).unwrap(), Distribution::dirac(0.0).unwrap()],
        )
        .unwrap();
        let c = asymptotic_curve(&dirac, &[1, 10, 1000]).unwrap();
        assert!(c.points.iter().all(|p| p.value == 0.0));
    }

    #[test]
    fn distribution_free_values() {
        assert_abs_diff_eq!(distribution_free_bound(6, 600, 0.05).unwrap(), 9.962_295_497_524_15, epsilon = 1e-9);
        assert!(distribution_free_bound(6, 600, 1e-9).unwrap().abs() < 1e-6);
        assert!(distribution_free_bound(6, 600, 0.5).is_err());
        assert_eq!(distribution_free_opt(6, 600).unwrap(), 3.0);
        assert_eq!(distribution_free_opt(6, 2).unwrap(), 0.1);
        assert_abs_diff_eq!(
            distribution_free_information(0.1).unwrap(),
            0.5 * (1.0f64 / 0.96).ln(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn known_mu_star_values() {
        let b = bpr_known_mu_star(0.1, 100).unwrap();
        assert_abs_diff_eq!(b.count_v1, 50.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.regret_v1, 5.0, epsilon = 1e-12);
        assert_eq!(bpr_known_mu_star(1.0, 1).unwrap().count_v1, 0.5);
        let far = bpr_known_mu_star(0.5, 1 << 60).unwrap();
        assert_abs_diff_eq!(far.count_v1, 4.0, epsilon = 1e-9);
        // 2 ln 2 / (1 + 2 ln 4) is below T/2 = 0.5
        assert_abs_diff_eq!(bpr_known_mu_star(1.0, 1).unwrap().count_v2, 0.367_465_012_273_283, epsilon = 1e-12);
        assert!(bpr_known_mu_star(0.0, 5).is_err());
    }

    #[test]
    fn known_gap_values() {
        // mpmath: W(10000 * 0.04 / 1.2) = 4.34103..., bound 10.8525777
        assert_abs_diff_eq!(bpr_known_gap(0.2, 10_000).unwrap(), 10.852_577_7, epsilon = 1e-6);
        // W(1/1.2) = 0.5036172..., so the first branch wins
        assert_abs_diff_eq!(bpr_known_gap(1.0, 1).unwrap(), 0.251_808_6, epsilon = 1e-6);
        // T gap^2 / 1.2 = e gives W = 1
        let delta = (1.2 * std::f64::consts::E).sqrt();
        assert_abs_diff_eq!(bpr_known_gap(delta, 1).unwrap(), 1.0 / (2.0 * delta), epsilon = 1e-12);
        for &(d, t) in &[(0.2, 10_000), (0.05, 1_000_000), (1.0, 7)] {
            assert!(known_gap_defining_residual(d, t).unwrap().abs() <= 1e-9);
        }
    }

    #[test]
    fn small_t_absolute_values() {
        let nu = BanditProblem::figure1();
        let opt = small_t_absolute(&nu, 0, 60, 6).unwrap();
        assert_eq!(opt.count.value, 10.0);
        assert_eq!(opt.threshold, f64::INFINITY);
        let arm = small_t_absolute(&nu, 1, 110, 6).unwrap();
        assert_abs_diff_eq!(arm.threshold, 110.942_89, epsilon = 1e-4);
        // below the threshold the bound is at least T / (2K)
        assert!(arm.count.value >= 110.0 / 12.0);
        let late = small_t_absolute(&nu, 5, 100_000, 6).unwrap();
        assert!(late.count.void && late.count.value == 0.0);
    }

    #[test]
    fn small_t_relative_values() {
        let nu = BanditProblem::figure1();
        let r = small_t_relative(&nu, 1, 0, 60, 6).unwrap();
        assert_abs_diff_eq!(r.ratio.value, 0.699_772_64, epsilon = 1e-6);
        assert_eq!(r.first_branch_threshold, 10.0);
        assert_eq!(small_t_relative(&nu, 1, 0, 0, 6).unwrap().ratio.value, 1.0);
        assert_eq!(small_t_relative(&nu, 0, 0, 50, 6).unwrap().ratio.value, 1.0);
        assert!(small_t_relative(&nu, 0, 1, 50, 6).is_err());
    }

    #[test]
    fn collective_values() {
        let nu = BanditProblem::figure1();
        let c = collective_bound(&nu, 10).unwrap();
        assert_abs_diff_eq!(c.count.value, 5.796_951_295, epsilon = 1e-6);
        assert_abs_diff_eq!(c.regret.value, 0.057_969_512_95, epsilon = 1e-8);
        assert_eq!(collective_bound(&nu, 0).unwrap().count.value, 0.0);
        let same = BanditProblem::bernoulli(&[0.4, 0.4, 0.4]).unwrap();
        let c = collective_bound(&same, 50).unwrap();
        assert_eq!(c.count.value, 0.0);
        assert!(!c.count.void);
    }

    #[test]
    fn large_t_terms() {
        let nu = BanditProblem::figure1();
        let consts = LargeTConstants::for_problem(&nu, DEFAULT_C_PSI).unwrap();
        let b = large_t_bound(&nu, 1, 1000, &consts).unwrap();
        assert!(!b.applicable);
        assert!(large_t_bound(&nu, 1, 1, &consts).is_err());
        assert!(large_t_bound(&nu, 0, 100, &consts).is_err());
        // term-by-term re-derivation at T = 2^60
        let t = 1u64 << 60;
        let b = large_t_bound(&nu, 1, t, &consts).unwrap();
        let ln_t = 60.0 * std::f64::consts::LN_2;
        let k = 0.001_126_705_820_035_197_5;
        let omega = (0.05 + 0.475 - 0.04) * 2.0 / (0.05 * 0.95);
        assert_abs_diff_eq!(consts.omega[1], omega, epsilon = 1e-12);
        assert_abs_diff_eq!(b.a_t, omega / k / ln_t.powi(4), epsilon = 1e-12);
        assert_abs_diff_eq!(b.b_t, 16.0 * 13_046.264_802_217_18 * ln_t / t as f64, epsilon = 1e-15);
        assert_abs_diff_eq!(b.c_t, (6.0 * 16.0 * ln_t.powi(9)).ln() / ln_t, epsilon = 1e-12);
        assert!(b.applicable);
        let expected = ln_t / k - (b.a_t + b.b_t + b.c_t) * ln_t - std::f64::consts::LN_2 / k;
        assert_abs_diff_eq!(b.count.value, expected, epsilon = 1e-6);
        assert!(b.count.value <= asymptotic_count(&nu, 1, t).unwrap());
    }

    #[test]
    fn large_t_ratio_tends_to_one() {
        let nu = BanditProblem::figure1();
        let consts = LargeTConstants::for_problem(&nu, DEFAULT_C_PSI).unwrap();
        let grid = doubling_grid(u64::MAX);
        let last = *grid.last().unwrap();
        let b = large_t_bound(&nu, 1, last, &consts).unwrap();
        assert!(b.applicable);
        let ratio = b.count.value / asymptotic_count(&nu, 1, last).unwrap();
        assert!((1.0 - ratio).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn envelope_phases() {
        let nu = BanditProblem::figure1();
        let consts = LargeTConstants::for_problem(&nu, DEFAULT_C_PSI).unwrap();
        let env = envelope(&nu, &[1, 10, 50, 100], &consts).unwrap();
        assert!(env.points.iter().all(|p| p.value > 0.0));
        assert!(env
            .points
            .iter()
            .all(|p| matches!(p.attained_by, Some(BoundId::Collective | BoundId::SmallTAbsolute))));
        let same = BanditProblem::bernoulli(&[0.3, 0.3]).unwrap();
        let c = LargeTConstants::for_problem(&same, DEFAULT_C_PSI).unwrap();
        let env = envelope(&same, &[1, 2, 3], &c).unwrap();
        assert!(env.points.iter().all(|p| p.value == 0.0 && p.attained_by.is_none()));
    }

    #[test]
    fn curves_reject_bad_grids() {
        let nu = BanditProblem::figure1();
        assert!(asymptotic_curve(&nu, &[]).is_err());
        assert!(asymptotic_curve(&nu, &[0, 1]).is_err());
        assert!(asymptotic_curve(&nu, &[5, 5]).is_err());
    }

    #[test]
    fn csv_layout() {
        let nu = BanditProblem::figure1();
        let consts = LargeTConstants::for_problem(&nu, DEFAULT_C_PSI).unwrap();
        let mut buf = Vec::new();
        envelope(&nu, &[10], &consts).unwrap().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("bound_id,T,value,void,attained_by"));
        assert!(lines.next().unwrap().starts_with("envelope,10,"));
    }

    #[test]
    fn two_armed_gaussian_gate() {
        assert_eq!(two_armed_unit_gaussian_gap(&gaussian_pair(0.5)).unwrap(), 0.5);
        assert!(two_armed_unit_gaussian_gap(&BanditProblem::figure1()).is_err());
    }
}
