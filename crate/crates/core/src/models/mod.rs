//! Reward distributions, bandit models and bandit problems.
//!
//! A [`Model`] is the set `D` of laws arms may take; `K_inf` is always
//! relative to it. One-parameter exponential families use their closed forms,
//! the bounded-support model goes through the dual solver in [`kinf`].

pub mod kinf;

use serde::{Deserialize, Serialize};

use crate::divergence::{bernoulli_kl_unchecked, ExtNonNeg};
use crate::error::{Error, Result};

const WEIGHT_SUM_TOL: f64 = 1e-12;

/// The reward law of one arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Distribution {
    Bernoulli { p: f64 },
    /// Gaussian with known variance.
    Gaussian { mean: f64, variance: f64 },
    Poisson { mean: f64 },
    /// Gamma with known shape, parameterised by its mean.
    Gamma { shape: f64, mean: f64 },
    /// Binomial with `trials` draws, parameterised by its mean `trials * p`.
    Binomial { trials: u32, mean: f64 },
    Dirac { point: f64 },
    /// Finitely supported law on `[0, ceiling]`.
    Finite { points: Vec<f64>, weights: Vec<f64>, ceiling: f64 },
}

impl Distribution {
    pub fn bernoulli(p: f64) -> Result<Self> {
        Distribution::Bernoulli { p }.validated()
    }

    pub fn gaussian(mean: f64, variance: f64) -> Result<Self> {
        Distribution::Gaussian { mean, variance }.validated()
    }

    pub fn poisson(mean: f64) -> Result<Self> {
        Distribution::Poisson { mean }.validated()
    }

    pub fn gamma(shape: f64, mean: f64) -> Result<Self> {
        Distribution::Gamma { shape, mean }.validated()
    }

    pub fn binomial(trials: u32, mean: f64) -> Result<Self> {
        Distribution::Binomial { trials, mean }.validated()
    }

    pub fn dirac(point: f64) -> Result<Self> {
        Distribution::Dirac { point }.validated()
    }

    pub fn finite(points: Vec<f64>, weights: Vec<f64>, ceiling: f64) -> Result<Self> {
        Distribution::Finite { points, weights, ceiling }.validated()
    }

    pub fn family(&self) -> &'static str {
        match self {
            Distribution::Bernoulli { .. } => "bernoulli",
            Distribution::Gaussian { .. } => "gaussian",
            Distribution::Poisson { .. } => "poisson",
            Distribution::Gamma { .. } => "gamma",
            Distribution::Binomial { .. } => "binomial",
            Distribution::Dirac { .. } => "dirac",
            Distribution::Finite { .. } => "finite",
        }
    }

    /// Checks parameter ranges and canonicalises finite supports (sorted,
    /// merged duplicates, zero weights dropped).
    pub fn validated(self) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidDistribution(msg));
        match self {
            Distribution::Bernoulli { p } => {
                if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
                    return bad(format!("bernoulli parameter {p} outside [0, 1]"));
                }
                Ok(self)
            }
            Distribution::Gaussian { mean, variance } => {
                if !mean.is_finite() || !(variance.is_finite() && variance > 0.0) {
                    return bad(format!("gaussian({mean}, {variance}) needs finite mean and variance > 0"));
                }
                Ok(self)
            }
            Distribution::Poisson { mean } => {
                if !(mean.is_finite() && mean > 0.0) {
                    return bad(format!("poisson mean {mean} must be > 0"));
                }
                Ok(self)
            }
            Distribution::Gamma { shape, mean } => {
                if !(shape.is_finite() && shape > 0.0 && mean.is_finite() && mean > 0.0) {
                    return bad(format!("gamma(shape {shape}, mean {mean}) needs both > 0"));
                }
                Ok(self)
            }
            Distribution::Binomial { trials, mean } => {
                if trials == 0 || !(mean > 0.0 && mean < f64::from(trials)) {
                    return bad(format!("binomial(n = {trials}, mean {mean}) needs n >= 1 and mean in (0, n)"));
                }
                Ok(self)
            }
            Distribution::Dirac { point } => {
                if !point.is_finite() {
                    return bad(format!("dirac point {point} is not finite"));
                }
                Ok(self)
            }
            Distribution::Finite { points, weights, ceiling } => {
                if !(ceiling.is_finite() && ceiling > 0.0) {
                    return bad(format!("finite ceiling {ceiling} must be > 0"));
                }
                if points.is_empty() || points.len() != weights.len() {
                    return bad(format!(
                        "finite law needs as many points as weights ({} vs {})",
                        points.len(),
                        weights.len()
                    ));
                }
                let mut pairs = Vec::with_capacity(points.len());
                for (&x, &w) in points.iter().zip(&weights) {
                    if !(x.is_finite() && (0.0..=ceiling).contains(&x)) {
                        return bad(format!("support point {x} outside [0, {ceiling}]"));
                    }
                    if !(w.is_finite() && w >= 0.0) {
                        return bad(format!("weight {w} is not a non-negative number"));
                    }
                    pairs.push((x, w));
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > WEIGHT_SUM_TOL {
                    return bad(format!("weights sum to {total}, not 1"));
                }
                pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut points: Vec<f64> = Vec::with_capacity(pairs.len());
                let mut weights: Vec<f64> = Vec::with_capacity(pairs.len());
                for (x, w) in pairs {
                    if w == 0.0 {
                        continue;
                    }
                    if points.last() == Some(&x) {
                        *weights.last_mut().unwrap() += w;
                    } else {
                        points.push(x);
                        weights.push(w);
                    }
                }
                Ok(Distribution::Finite { points, weights, ceiling })
            }
        }
    }

    /// Expectation `E(d)`.
    pub fn mean(&self) -> f64 {
        match self {
            Distribution::Bernoulli { p } => *p,
            Distribution::Gaussian { mean, .. }
            | Distribution::Poisson { mean }
            | Distribution::Gamma { mean, .. }
            | Distribution::Binomial { mean, .. } => *mean,
            Distribution::Dirac { point } => *point,
            Distribution::Finite { points, weights, .. } => {
                points.iter().zip(weights).map(|(x, w)| x * w).sum()
            }
        }
    }

    /// Support points and weights, for the finitely supported families.
    pub fn finite_support(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match self {
            Distribution::Bernoulli { p } => {
                let (pts, ws): (Vec<f64>, Vec<f64>) =
                    [(0.0, 1.0 - p), (1.0, *p)].into_iter().filter(|&(_, w)| w > 0.0).unzip();
                Some((pts, ws))
            }
            Distribution::Dirac { point } => Some((vec![*point], vec![1.0])),
            Distribution::Finite { points, weights, .. } => Some((points.clone(), weights.clone())),
            _ => None,
        }
    }
}

/// KL divergence between two finitely supported laws given as sorted supports.
fn finite_kl(p: (&[f64], &[f64]), q: (&[f64], &[f64])) -> ExtNonNeg {
    let mut total = 0.0;
    for (x, w) in p.0.iter().zip(p.1) {
        if *w == 0.0 {
            continue;
        }
        match q.0.iter().position(|y| y == x) {
            Some(j) if q.1[j] > 0.0 => total += w * (w / q.1[j]).ln(),
            _ => return ExtNonNeg::INFINITY,
        }
    }
    ExtNonNeg::from_rounded(total)
}

/// `KL(d1, d2)` from the per-family closed forms.
pub fn kl_div(d1: &Distribution, d2: &Distribution) -> Result<ExtNonNeg> {
    use Distribution::*;
    if d1 == d2 {
        return Ok(ExtNonNeg::ZERO);
    }
    let v = match (d1, d2) {
        (Bernoulli { p }, Bernoulli { p: q }) => return Ok(bernoulli_kl_unchecked(*p, *q)),
        (Gaussian { mean: m1, variance: v1 }, Gaussian { mean: m2, variance: v2 }) => {
            if v1 != v2 {
                return Err(Error::ParameterMismatch(format!("gaussian variances {v1} and {v2} differ")));
            }
            (m1 - m2).powi(2) / (2.0 * v1)
        }
        (Poisson { mean: m1 }, Poisson { mean: m2 }) => m2 - m1 + m1 * (m1 / m2).ln(),
        (Gamma { shape: a1, mean: m1 }, Gamma { shape: a2, mean: m2 }) => {
            if a1 != a2 {
                return Err(Error::ParameterMismatch(format!("gamma shapes {a1} and {a2} differ")));
            }
            let r = m1 / m2;
            a1 * (r - 1.0 - r.ln())
        }
        (Binomial { trials: n1, mean: m1 }, Binomial { trials: n2, mean: m2 }) => {
            if n1 != n2 {
                return Err(Error::ParameterMismatch(format!("binomial trials {n1} and {n2} differ")));
            }
            let n = f64::from(*n1);
            m1 * (m1 / m2).ln() + (n - m1) * ((n - m1) / (n - m2)).ln()
        }
        (Bernoulli { .. } | Dirac { .. } | Finite { .. }, Bernoulli { .. } | Dirac { .. } | Finite { .. }) => {
            let (p_pts, p_ws) = d1.finite_support().expect("finite family");
            let (q_pts, q_ws) = d2.finite_support().expect("finite family");
            return Ok(finite_kl((&p_pts, &p_ws), (&q_pts, &q_ws)));
        }
        _ => return Err(Error::FamilyMismatch(d1.family(), d2.family())),
    };
    Ok(ExtNonNeg::from_rounded(v))
}

/// The bandit model `D` the arms of a problem live in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Model {
    Bernoulli,
    Gaussian { variance: f64 },
    Poisson,
    Gamma { shape: f64 },
    Binomial { trials: u32 },
    /// Point masses only: no law can be reached at finite divergence.
    Dirac,
    /// All laws on `[0, ceiling]` with mean below the ceiling; runtime values
    /// are finitely supported (Bernoulli and Dirac laws included).
    BoundedSupport { ceiling: f64 },
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Bernoulli => "bernoulli",
            Model::Gaussian { .. } => "gaussian",
            Model::Poisson => "poisson",
            Model::Gamma { .. } => "gamma",
            Model::Binomial { .. } => "binomial",
            Model::Dirac => "dirac",
            Model::BoundedSupport { .. } => "bounded_support",
        }
    }

    pub fn admits(&self, d: &Distribution) -> bool {
        match (self, d) {
            (Model::Bernoulli, Distribution::Bernoulli { .. }) => true,
            (Model::Gaussian { variance }, Distribution::Gaussian { variance: v, .. }) => variance == v,
            (Model::Poisson, Distribution::Poisson { .. }) => true,
            (Model::Gamma { shape }, Distribution::Gamma { shape: s, .. }) => shape == s,
            (Model::Binomial { trials }, Distribution::Binomial { trials: n, .. }) => trials == n,
            (Model::Dirac, Distribution::Dirac { .. }) => true,
            (Model::BoundedSupport { ceiling }, d) => match d.finite_support() {
                Some((pts, _)) => pts.iter().all(|x| (0.0..=*ceiling).contains(x)) && d.mean() < *ceiling,
                None => false,
            },
            _ => false,
        }
    }

    /// Upper end of the mean range `I` for exponential families
    /// (`None` for the non-parametric models).
    fn mean_upper_end(&self) -> Option<f64> {
        match self {
            Model::Bernoulli => Some(1.0),
            Model::Binomial { trials } => Some(f64::from(*trials)),
            Model::Gaussian { .. } | Model::Poisson | Model::Gamma { .. } => Some(f64::INFINITY),
            Model::Dirac | Model::BoundedSupport { .. } => None,
        }
    }

    /// The family member with mean `mu`, for exponential families.
    fn member_with_mean(&self, mu: f64) -> Option<Distribution> {
        match self {
            Model::Bernoulli => Some(Distribution::Bernoulli { p: mu }),
            Model::Gaussian { variance } => Some(Distribution::Gaussian { mean: mu, variance: *variance }),
            Model::Poisson => Some(Distribution::Poisson { mean: mu }),
            Model::Gamma { shape } => Some(Distribution::Gamma { shape: *shape, mean: mu }),
            Model::Binomial { trials } => Some(Distribution::Binomial { trials: *trials, mean: mu }),
            Model::Dirac | Model::BoundedSupport { .. } => None,
        }
    }

    /// `G_{mu*}`, the bound on the curvature of the KL representation over
    /// `[mu*, mu* + B_{mu*}]` (exponential families only).
    pub fn curvature_bound(&self, mu_star: f64) -> Result<f64> {
        self.check_interior(mu_star)?;
        match self {
            Model::Poisson => Ok(1.0 / mu_star),
            Model::Gamma { shape } => Ok(shape / (mu_star * mu_star)),
            Model::Gaussian { variance } => Ok(1.0 / variance),
            Model::Bernoulli => Ok(2.0 / (mu_star * (1.0 - mu_star))),
            Model::Binomial { trials } => {
                let n = f64::from(*trials);
                Ok(2.0 * n / (mu_star * (n - mu_star)))
            }
            Model::Dirac | Model::BoundedSupport { .. } => Err(Error::ModelMismatch(format!(
                "{} is not an exponential family",
                self.name()
            ))),
        }
    }

    /// `B_{mu*} = min{(M - mu*)/2, 1}` for an exponential family indexed by `(m, M)`.
    pub fn exp_family_step(&self, mu_star: f64) -> Result<f64> {
        self.check_interior(mu_star)?;
        let upper = self
            .mean_upper_end()
            .ok_or_else(|| Error::ModelMismatch(format!("{} is not an exponential family", self.name())))?;
        Ok(((upper - mu_star) / 2.0).min(1.0))
    }

    fn check_interior(&self, mu: f64) -> Result<()> {
        let inside = match self {
            Model::Bernoulli => mu > 0.0 && mu < 1.0,
            Model::Binomial { trials } => mu > 0.0 && mu < f64::from(*trials),
            Model::Poisson | Model::Gamma { .. } => mu > 0.0 && mu.is_finite(),
            Model::Gaussian { .. } => mu.is_finite(),
            Model::BoundedSupport { ceiling } => (0.0..*ceiling).contains(&mu),
            Model::Dirac => mu.is_finite(),
        };
        if inside {
            Ok(())
        } else {
            Err(Error::domain(format!("mean {mu} outside the index range of the {} model", self.name())))
        }
    }

    /// Slope `omega(d, mu*)` of the linear continuity bound
    /// `K_inf(d, mu* + eps) <= K_inf(d, mu*) + eps * omega`.
    pub fn continuity_slope(&self, d: &Distribution, mu_star: f64) -> Result<f64> {
        self.check_admits(d)?;
        match self {
            Model::BoundedSupport { ceiling } => {
                self.check_interior(mu_star)?;
                Ok(4.0 / (ceiling - mu_star))
            }
            Model::Dirac => Err(Error::ModelMismatch("the dirac model has no continuity bound".into())),
            _ => {
                let step = self.exp_family_step(mu_star)?;
                let g = self.curvature_bound(mu_star)?;
                Ok(((mu_star + step - d.mean()) * g).max(0.0))
            }
        }
    }

    /// Largest `eps` (exclusive) for which the continuity bound is proven.
    pub fn continuity_eps_limit(&self, mu_star: f64) -> Result<f64> {
        match self {
            Model::BoundedSupport { ceiling } => {
                self.check_interior(mu_star)?;
                Ok((ceiling - mu_star) / 4.0)
            }
            _ => self.exp_family_step(mu_star),
        }
    }

    fn check_admits(&self, d: &Distribution) -> Result<()> {
        if self.admits(d) {
            Ok(())
        } else {
            Err(Error::ModelMismatch(format!(
                "{} law {:?} is not in the {} model",
                d.family(),
                d,
                self.name()
            )))
        }
    }
}

/// `K_inf(d, x)`: smallest `KL(d, d')` over `d'` in the model with `E(d') > x`.
///
/// Returns 0 at `mean(d) >= x` (the boundary case is the limit from below) and
/// `+inf` when no law in the model has mean above `x`.
pub fn k_inf(d: &Distribution, x: f64, model: &Model) -> Result<ExtNonNeg> {
    model.check_admits(d)?;
    if x.is_nan() {
        return Err(Error::domain("k_inf threshold is NaN"));
    }
    let mu = d.mean();
    if mu >= x {
        return Ok(ExtNonNeg::ZERO);
    }
    match model {
        Model::Dirac => Ok(ExtNonNeg::INFINITY),
        Model::BoundedSupport { ceiling } => {
            if x >= *ceiling {
                return Ok(ExtNonNeg::INFINITY);
            }
            let (pts, ws) = d.finite_support().expect("admitted laws are finite");
            Ok(ExtNonNeg::from_rounded(kinf::bounded_support_dual(&pts, &ws, x, *ceiling)))
        }
        _ => {
            let upper = model.mean_upper_end().expect("exponential family");
            if x >= upper {
                return Ok(ExtNonNeg::INFINITY);
            }
            let target = model.member_with_mean(x).expect("exponential family");
            kl_div(d, &target)
        }
    }
}

/// Upper bound on `K_inf(d, mu* + eps) - K_inf(d, mu*)` in well-behaved models:
/// `4 eps / (M - mu*)` for bounded supports, `eps (mu* + B - mu) G` for
/// exponential families.
pub fn k_inf_continuity_increment(d: &Distribution, mu_star: f64, eps: f64, model: &Model) -> Result<f64> {
    let limit = model.continuity_eps_limit(mu_star)?;
    if !(eps > 0.0 && eps < limit) {
        return Err(Error::domain(format!("eps = {eps} outside the validity range (0, {limit})")));
    }
    Ok(eps * model.continuity_slope(d, mu_star)?)
}

/// An ordered list of arm laws in one model, with its derived quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditProblem {
    model: Model,
    arms: Vec<Distribution>,
    means: Vec<f64>,
    mu_star: f64,
    gaps: Vec<f64>,
}

impl BanditProblem {
    pub fn new(model: Model, arms: Vec<Distribution>) -> Result<Self> {
        if arms.len() < 2 {
            return Err(Error::InvalidProblem(format!("need at least 2 arms, got {}", arms.len())));
        }
        let arms = arms.into_iter().map(Distribution::validated).collect::<Result<Vec<_>>>()?;
        for (i, arm) in arms.iter().enumerate() {
            if !model.admits(arm) {
                return Err(Error::ModelMismatch(format!(
                    "arm {} ({}) is not in the {} model",
                    i + 1,
                    arm.family(),
                    model.name()
                )));
            }
        }
        let means: Vec<f64> = arms.iter().map(Distribution::mean).collect();
        let mu_star = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let gaps = means.iter().map(|m| mu_star - m).collect();
        Ok(BanditProblem { model, arms, means, mu_star, gaps })
    }

    /// Bernoulli problem with the given means.
    pub fn bernoulli(means: &[f64]) -> Result<Self> {
        let arms = means.iter().map(|&p| Distribution::bernoulli(p)).collect::<Result<Vec<_>>>()?;
        BanditProblem::new(Model::Bernoulli, arms)
    }

    /// The six-armed Bernoulli problem of the flagship experiment.
    pub fn figure1() -> Self {
        BanditProblem::bernoulli(&FIGURE1_MEANS).expect("preset is valid")
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn arms(&self) -> &[Distribution] {
        &self.arms
    }

    pub fn arm(&self, a: usize) -> &Distribution {
        &self.arms[a]
    }

    pub fn arm_count(&self) -> usize {
        self.arms.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn mu_star(&self) -> f64 {
        self.mu_star
    }

    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    pub fn gap(&self, a: usize) -> f64 {
        self.gaps[a]
    }

    pub fn is_optimal(&self, a: usize) -> bool {
        self.gaps[a] == 0.0
    }

    pub fn optimal_arms(&self) -> Vec<usize> {
        (0..self.arm_count()).filter(|&a| self.is_optimal(a)).collect()
    }

    pub fn suboptimal_arms(&self) -> Vec<usize> {
        (0..self.arm_count()).filter(|&a| !self.is_optimal(a)).collect()
    }

    /// Arms attaining the smallest mean (all ties kept).
    pub fn worst_arms(&self) -> Vec<usize> {
        let low = self.means.iter().copied().fold(f64::INFINITY, f64::min);
        (0..self.arm_count()).filter(|&a| self.means[a] == low).collect()
    }

    /// Smallest positive gap, if any arm is suboptimal.
    pub fn min_gap(&self) -> Option<f64> {
        self.gaps.iter().copied().filter(|&g| g > 0.0).reduce(f64::min)
    }

    pub fn check_arm(&self, a: usize) -> Result<()> {
        if a < self.arm_count() {
            Ok(())
        } else {
            Err(Error::precondition(format!("arm index {a} out of range for {} arms", self.arm_count())))
        }
    }

    /// `K_inf(nu_a, mu*)` in the problem's model.
    pub fn k_inf_to_best(&self, a: usize) -> Result<ExtNonNeg> {
        self.check_arm(a)?;
        k_inf(&self.arms[a], self.mu_star, &self.model)
    }

    /// `H(nu) = sum over suboptimal arms of 1 / gap^2`.
    pub fn hardness_h(&self) -> f64 {
        self.gaps.iter().filter(|&&g| g > 0.0).map(|g| 1.0 / (g * g)).sum()
    }

    /// `K_max = min over worst arms w of max over optimal arms a* of KL(nu_w, nu_a*)`.
    pub fn k_max(&self) -> Result<ExtNonNeg> {
        let optimal = self.optimal_arms();
        let mut best = ExtNonNeg::INFINITY;
        for w in self.worst_arms() {
            let mut worst_case = ExtNonNeg::ZERO;
            for &a in &optimal {
                worst_case = worst_case.max(kl_div(&self.arms[w], &self.arms[a])?);
            }
            best = best.min(worst_case);
        }
        Ok(best)
    }

    /// Same problem with another list of arms (model kept).
    pub fn with_arms(&self, arms: Vec<Distribution>) -> Result<Self> {
        BanditProblem::new(self.model, arms)
    }
}

/// Means of the six Bernoulli arms of the flagship experiment.
pub const FIGURE1_MEANS: [f64; 6] = [0.05, 0.04, 0.02, 0.015, 0.01, 0.005];

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn means() {
        assert_eq!(Distribution::bernoulli(0.05).unwrap().mean(), 0.05);
        assert_eq!(Distribution::dirac(0.0).unwrap().mean(), 0.0);
        let f = Distribution::finite(vec![0.0, 1.0, 2.0], vec![0.5, 0.25, 0.25], 2.0).unwrap();
        assert_eq!(f.mean(), 0.75);
    }

    #[test]
    fn validation() {
        assert!(Distribution::bernoulli(1.2).is_err());
        assert!(Distribution::gaussian(0.0, 0.0).is_err());
        assert!(Distribution::poisson(0.0).is_err());
        assert!(Distribution::binomial(3, 3.0).is_err());
        assert!(Distribution::finite(vec![0.0, 1.5], vec![0.5, 0.5], 1.0).is_err());
        assert!(Distribution::finite(vec![0.0, 1.0], vec![0.5, 0.4], 1.0).is_err());
        let merged = Distribution::finite(vec![1.0, 0.0, 1.0, 0.5], vec![0.25, 0.5, 0.25, 0.0], 1.0).unwrap();
        assert_eq!(
            merged,
            Distribution::Finite { points: vec![0.0, 1.0], weights: vec![0.5, 0.5], ceiling: 1.0 }
        );
    }

    #[test]
    fn kl_closed_forms() {
        let g1 = Distribution::gaussian(-0.5, 1.0).unwrap();
        let g2 = Distribution::gaussian(0.0, 1.0).unwrap();
        assert_abs_diff_eq!(kl_div(&g1, &g2).unwrap().value(), 0.125, epsilon = 1e-15);
        // mpmath: 1 + 2 ln(2/3) = 0.18906978378367...
        let p = kl_div(&Distribution::poisson(2.0).unwrap(), &Distribution::poisson(3.0).unwrap()).unwrap();
        assert_abs_diff_eq!(p.value(), 0.189_069_783_783_671_2, epsilon = 1e-12);
        // mpmath: ln 2 - 1/2 = 0.19314718055994...
        let g = kl_div(&Distribution::gamma(1.0, 1.0).unwrap(), &Distribution::gamma(1.0, 2.0).unwrap()).unwrap();
        assert_abs_diff_eq!(g.value(), 0.193_147_180_559_945_3, epsilon = 1e-12);
        let b = kl_div(&Distribution::binomial(1, 0.04).unwrap(), &Distribution::binomial(1, 0.05).unwrap()).unwrap();
        assert_abs_diff_eq!(b.value(), 0.001_126_705_820_035_197_5, epsilon = 1e-12);
    }

    #[test]
    fn kl_identity_and_errors() {
        let all = [
            Distribution::bernoulli(0.3).unwrap(),
            Distribution::gaussian(1.0, 2.0).unwrap(),
            Distribution::poisson(4.0).unwrap(),
            Distribution::gamma(2.0, 3.0).unwrap(),
            Distribution::binomial(5, 2.0).unwrap(),
            Distribution::dirac(0.3).unwrap(),
            Distribution::finite(vec![0.0, 0.5], vec![0.5, 0.5], 1.0).unwrap(),
        ];
        for d in &all {
            assert_eq!(kl_div(d, d).unwrap(), ExtNonNeg::ZERO);
        }
        assert_eq!(
            kl_div(&all[1], &all[2]),
            Err(Error::FamilyMismatch("gaussian", "poisson"))
        );
        let other_var = Distribution::gaussian(1.0, 1.0).unwrap();
        assert!(matches!(kl_div(&all[1], &other_var), Err(Error::ParameterMismatch(_))));
    }

    #[test]
    fn finite_kl_and_singularity() {
        let d1 = Distribution::finite(vec![0.0, 0.5], vec![0.5, 0.5], 1.0).unwrap();
        let d2 = Distribution::finite(vec![0.0, 0.5, 1.0], vec![0.25, 0.25, 0.5], 1.0).unwrap();
        assert_abs_diff_eq!(kl_div(&d1, &d2).unwrap().value(), 2f64.ln(), epsilon = 1e-15);
        assert!(kl_div(&d2, &d1).unwrap().is_infinite());
        let dirac0 = Distribution::dirac(0.0).unwrap();
        let dirac1 = Distribution::dirac(1.0).unwrap();
        assert!(kl_div(&dirac0, &dirac1).unwrap().is_infinite());
        // a Bernoulli law compared as a finite law on {0, 1}
        let b = Distribution::bernoulli(0.5).unwrap();
        let f = Distribution::finite(vec![0.0, 1.0], vec![0.5, 0.5], 1.0).unwrap();
        assert_eq!(kl_div(&b, &f).unwrap(), ExtNonNeg::ZERO);
    }

    #[test]
    fn k_inf_exponential_families() {
        let b = Distribution::bernoulli(0.04).unwrap();
        let v = k_inf(&b, 0.05, &Model::Bernoulli).unwrap();
        assert_abs_diff_eq!(v.value(), 0.001_126_705_820_035_197_5, epsilon = 1e-12);
        assert_eq!(k_inf(&b, 0.04, &Model::Bernoulli).unwrap(), ExtNonNeg::ZERO);
        assert_eq!(k_inf(&b, 0.01, &Model::Bernoulli).unwrap(), ExtNonNeg::ZERO);
        assert!(k_inf(&b, 1.0, &Model::Bernoulli).unwrap().is_infinite());
        let g = Distribution::gaussian(0.0, 4.0).unwrap();
        assert_abs_diff_eq!(
            k_inf(&g, 1.0, &Model::Gaussian { variance: 4.0 }).unwrap().value(),
            0.125,
            epsilon = 1e-15
        );
        assert!(matches!(k_inf(&g, 1.0, &Model::Poisson), Err(Error::ModelMismatch(_))));
        let bin = Distribution::binomial(3, 1.0).unwrap();
        assert!(k_inf(&bin, 3.0, &Model::Binomial { trials: 3 }).unwrap().is_infinite());
    }

    #[test]
    fn k_inf_dirac_and_bounded() {
        let d = Distribution::dirac(0.0).unwrap();
        assert!(k_inf(&d, 0.5, &Model::Dirac).unwrap().is_infinite());
        assert_eq!(k_inf(&d, -0.5, &Model::Dirac).unwrap(), ExtNonNeg::ZERO);
        let f = Distribution::finite(vec![0.0, 0.5], vec![0.5, 0.5], 1.0).unwrap();
        let m = Model::BoundedSupport { ceiling: 1.0 };
        assert!(k_inf(&f, 1.0, &m).unwrap().is_infinite());
        assert_eq!(k_inf(&f, 0.1, &m).unwrap(), ExtNonNeg::ZERO);
        let v = k_inf(&f, 0.6, &m).unwrap().value();
        assert!(v > 0.0 && v.is_finite());
    }

    #[test]
    fn continuity_constants() {
        let m = Model::BoundedSupport { ceiling: 1.0 };
        let f = Distribution::finite(vec![0.0, 0.5], vec![0.5, 0.5], 1.0).unwrap();
        assert_abs_diff_eq!(k_inf_continuity_increment(&f, 0.5, 0.1, &m).unwrap(), 0.8, epsilon = 1e-15);
        assert!(k_inf_continuity_increment(&f, 0.5, 0.2, &m).is_err());
        assert_eq!(Model::Gaussian { variance: 1.0 }.curvature_bound(0.3).unwrap(), 1.0);
        assert_eq!(Model::Poisson.curvature_bound(2.0).unwrap(), 0.5);
        assert_eq!(Model::Gamma { shape: 2.0 }.curvature_bound(2.0).unwrap(), 0.5);
        assert_abs_diff_eq!(
            Model::Binomial { trials: 4 }.curvature_bound(1.0).unwrap(),
            8.0 / 3.0,
            epsilon = 1e-15
        );
        assert_eq!(Model::Poisson.exp_family_step(2.0).unwrap(), 1.0);
        assert_eq!(Model::Bernoulli.exp_family_step(0.5).unwrap(), 0.25);
    }

    #[test]
    fn problem_derived_sets() {
        let nu = BanditProblem::bernoulli(&[0.5, 0.2, 0.5, 0.2, 0.3]).unwrap();
        assert_eq!(nu.mu_star(), 0.5);
        assert_eq!(nu.optimal_arms(), vec![0, 2]);
        assert_eq!(nu.worst_arms(), vec![1, 3]);
        assert_abs_diff_eq!(nu.min_gap().unwrap(), 0.2, epsilon = 1e-15);
        assert!(BanditProblem::bernoulli(&[0.5]).is_err());
        let mixed = BanditProblem::new(
            Model::Bernoulli,
            vec![Distribution::bernoulli(0.5).unwrap(), Distribution::poisson(1.0).unwrap()],
        );
        assert!(matches!(mixed, Err(Error::ModelMismatch(_))));
    }

    #[test]
    fn hardness_and_kmax() {
        let same = BanditProblem::bernoulli(&[0.3, 0.3]).unwrap();
        assert_eq!(same.hardness_h(), 0.0);
        assert_eq!(same.k_max().unwrap(), ExtNonNeg::ZERO);
        let two = BanditProblem::bernoulli(&[0.5, 0.4]).unwrap();
        assert_abs_diff_eq!(two.hardness_h(), 100.0, epsilon = 1e-9);
        let fig = BanditProblem::figure1();
        // exact gaps (0.01, 0.03, 0.035, 0.04, 0.045); mpmath: 13046.2648022...
        assert_abs_diff_eq!(fig.hardness_h(), 13_046.264_802_217_18, epsilon = 1e-6);
        // mpmath kl(0.005, 0.05) = 0.034536423336216
        assert_abs_diff_eq!(fig.k_max().unwrap().value(), 0.034_536_423_336_216, epsilon = 1e-12);
        let gauss = BanditProblem::new(
            Model::Gaussian { variance: 1.0 },
            vec![Distribution::gaussian(0.0, 1.0).unwrap(), Distribution::gaussian(-0.5, 1.0).unwrap()],
        )
        .unwrap();
        assert_abs_diff_eq!(gauss.k_max().unwrap().value(), 0.125, epsilon = 1e-15);
    }
}
