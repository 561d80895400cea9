//! Inferential models and their posterior belief functions.
//!
//! Each model pairs an a-equation `X = a(Θ, U)` with a PRS family for `U`.
//! Given data `x`, a draw `S` of the PRS induces the focal element
//! `M_x(S) = {θ : x = a(θ, u) for some u ∈ S}`, and for an assertion `A`
//!
//! - `bel_x(A) = μ{M_x(S) ⊆ A}`,
//! - `pl_x(A) = 1 - bel_x(Aᶜ) = μ{M_x(S) ∩ A ≠ ∅}`.
//!
//! Supported models:
//!
//! | model        | a-equation                          | PRS                 |
//! |--------------|-------------------------------------|---------------------|
//! | normal mean  | `X = Θ + Φ⁻¹(U)`                    | interval            |
//! | Bernoulli    | `X_i = 1{U_i ≤ Θ}`                  | interval on `U_(N)`, `U_(N+1)` |
//! | homogeneity  | `Θ_i X_i = R P_i`                   | KL ball             |
//! | one-sample   | `X_(i) = F⁻¹(U_(i))`                | hierarchical beta box |

mod cdf;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use cdf::Cdf;

use crate::calibrate::CalibrationResult;
use crate::prs::{interval_noncoverage, BoxPool, KlPool, PrsShape};
use crate::specfun::{open01, phi, phi_inv, IncBeta};
use crate::specfun::{fill_uniform_simplex, sample_gamma};
use crate::{binomial_se, Error, MonteCarloParams, Result};

/// Belief and plausibility of one assertion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeliefPair {
    pub belief: f64,
    pub plausibility: f64,
    pub belief_se: f64,
    pub plausibility_se: f64,
    /// μ-mass of empty focal elements, removed by Dempster conditioning.
    pub conflict_mass: f64,
}

impl BeliefPair {
    pub fn exact(belief: f64, plausibility: f64) -> Self {
        Self {
            belief,
            plausibility,
            belief_se: 0.0,
            plausibility_se: 0.0,
            conflict_mass: 0.0,
        }
    }

    /// The pair for the complementary assertion: `bel(Aᶜ) = 1 - pl(A)`.
    pub fn complement(self) -> Self {
        Self {
            belief: 1.0 - self.plausibility,
            plausibility: 1.0 - self.belief,
            belief_se: self.plausibility_se,
            plausibility_se: self.belief_se,
            conflict_mass: self.conflict_mass,
        }
    }
}

/// What is asserted about the parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AssertionKind {
    /// `{Θ ≤ θ}`.
    LeTheta { theta: f64 },
    /// `{Θ = value}`.
    Singleton { value: f64 },
    /// `{Θ_1 = ⋯ = Θ_n}`.
    Homogeneity,
    /// `{F = F0}`.
    CdfEquals { cdf: Cdf },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub kind: AssertionKind,
    /// When set the assertion is the complement of `kind`.
    #[serde(default)]
    pub negated: bool,
}

/// A point of some model's parameter space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Parameter {
    Scalar(f64),
    Rates(Vec<f64>),
    Distribution(Cdf),
}

impl Assertion {
    pub fn le_theta(theta: f64) -> Self {
        Self { kind: AssertionKind::LeTheta { theta }, negated: false }
    }

    pub fn singleton(value: f64) -> Self {
        Self { kind: AssertionKind::Singleton { value }, negated: false }
    }

    pub fn homogeneity() -> Self {
        Self { kind: AssertionKind::Homogeneity, negated: false }
    }

    pub fn cdf_equals(cdf: Cdf) -> Self {
        Self { kind: AssertionKind::CdfEquals { cdf }, negated: false }
    }

    pub fn complement(self) -> Self {
        Self { negated: !self.negated, ..self }
    }

    /// Whether the assertion is true at `param`.
    pub fn holds(&self, param: &Parameter) -> Result<bool> {
        let inner = match (&self.kind, param) {
            (AssertionKind::LeTheta { theta }, Parameter::Scalar(t)) => t <= theta,
            (AssertionKind::Singleton { value }, Parameter::Scalar(t)) => t == value,
            (AssertionKind::Homogeneity, Parameter::Rates(r)) => r.windows(2).all(|w| w[0] == w[1]),
            (AssertionKind::CdfEquals { cdf }, Parameter::Distribution(f)) => cdf == f,
            _ => return Err(Error::domain("assertion does not apply to this parameter space")),
        };
        Ok(inner != self.negated)
    }
}

/// Observed data of one of the four models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ObservedData {
    Normal { x: f64 },
    Bernoulli { n: usize, successes: usize },
    /// Inter-arrival times, all positive.
    Homogeneity { times: Vec<f64> },
    OneSample { values: Vec<f64> },
}

impl ObservedData {
    pub fn validate(&self) -> Result<()> {
        match self {
            ObservedData::Normal { x } => {
                if !x.is_finite() {
                    return Err(Error::domain("normal observation must be finite"));
                }
            }
            ObservedData::Bernoulli { n, successes } => {
                if successes > n {
                    return Err(Error::domain(format!("success count {successes} exceeds n = {n}")));
                }
            }
            ObservedData::Homogeneity { times } => check_times(times)?,
            ObservedData::OneSample { values } => {
                if values.is_empty() || values.iter().any(|v| v.is_nan()) {
                    return Err(Error::domain("one-sample data must be nonempty and free of NaN"));
                }
            }
        }
        Ok(())
    }
}

/// Parameters driving [`generate_data`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ModelParams {
    Normal { theta: f64 },
    Bernoulli { theta: f64 },
    Homogeneity { rates: Vec<f64> },
    OneSample { dist: Cdf },
}

/// Simulate data through the a-equation with `U ~ μ`.
///
/// `n` is the sample size; the normal model always yields one observation
/// and the homogeneity model requires `n` to equal the number of rates.
pub fn generate_data<R: Rng + ?Sized>(params: &ModelParams, n: usize, rng: &mut R) -> Result<ObservedData> {
    if n == 0 {
        return Err(Error::domain("sample size must be >= 1"));
    }
    match params {
        ModelParams::Normal { theta } => {
            if !theta.is_finite() {
                return Err(Error::domain("normal mean must be finite"));
            }
            Ok(ObservedData::Normal { x: theta + phi_inv(open01(rng)) })
        }
        ModelParams::Bernoulli { theta } => {
            if !(0.0..=1.0).contains(theta) {
                return Err(Error::domain(format!("Bernoulli parameter must lie in [0,1], got {theta}")));
            }
            let successes = (0..n).filter(|_| open01(rng) <= *theta).count();
            Ok(ObservedData::Bernoulli { n, successes })
        }
        ModelParams::Homogeneity { rates } => {
            if rates.len() != n || n < 2 {
                return Err(Error::domain(format!(
                    "homogeneity needs n >= 2 rates matching n = {n}, got {}",
                    rates.len()
                )));
            }
            if rates.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
                return Err(Error::domain("exponential rates must be positive"));
            }
            // Θ_i X_i = R P_i with R ~ Gamma(n, 1) and P ~ Unif(P_{n-1})
            let r = sample_gamma(n as f64, rng)?;
            let mut p = Vec::with_capacity(n);
            fill_uniform_simplex(&mut p, n, rng);
            let times = p.iter().zip(rates).map(|(&pi, &t)| r * pi / t).collect();
            Ok(ObservedData::Homogeneity { times })
        }
        ModelParams::OneSample { dist } => {
            dist.validate()?;
            let values = (0..n)
                .map(|_| dist.quantile(open01(rng)))
                .collect::<Result<_>>()?;
            Ok(ObservedData::OneSample { values })
        }
    }
}

fn check_omega_unit(omega: f64) -> Result<()> {
    if (0.0..=1.0).contains(&omega) {
        Ok(())
    } else {
        Err(Error::domain(format!("index must lie in [0,1], got {omega}")))
    }
}

fn check_omega_nonneg(omega: f64) -> Result<()> {
    if omega >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("index must be nonnegative, got {omega}")))
    }
}

/// Normal mean, `A = {Θ ≤ θ}`, interval PRS: with `c = Φ(X - θ)`,
/// `bel = [1 - c/(1-ω)]⁺` and `pl = 1 - [(c - ω)/(1-ω)]⁺`.
pub fn normal_belief(x: f64, theta: f64, omega: f64) -> Result<BeliefPair> {
    check_omega_unit(omega)?;
    if !(x.is_finite() && theta.is_finite()) {
        return Err(Error::domain("normal observation and threshold must be finite"));
    }
    if omega == 1.0 {
        return Ok(BeliefPair::exact(0.0, 1.0));
    }
    if omega == 0.0 {
        // both focal endpoints coincide: the fiducial N(x, 1) posterior,
        // evaluated directly rather than as 1 - Φ(x - θ) to keep the left tail
        let f = phi(theta - x);
        return Ok(BeliefPair::exact(f, f));
    }
    let c = phi(x - theta);
    let s = 1.0 - omega;
    let bel = (1.0 - c / s).max(0.0);
    let pl = 1.0 - ((c - omega) / s).max(0.0);
    Ok(BeliefPair::exact(bel, pl.min(1.0)))
}

/// Monte Carlo version of [`normal_belief`] over the focal intervals
/// `[X - Φ⁻¹(U + ω(1-U)), X - Φ⁻¹(U - ωU)]`.
pub fn normal_belief_mc<R: Rng + ?Sized>(
    x: f64,
    theta: f64,
    omega: f64,
    mc: &MonteCarloParams,
    rng: &mut R,
) -> Result<BeliefPair> {
    check_omega_unit(omega)?;
    mc.check_inner()?;
    let z = |q: f64| {
        if q <= 0.0 {
            f64::NEG_INFINITY
        } else if q >= 1.0 {
            f64::INFINITY
        } else {
            phi_inv(q)
        }
    };
    let (mut inside, mut touch) = (0usize, 0usize);
    for _ in 0..mc.inner {
        let u = open01(rng);
        let lower = x - z(u + omega * (1.0 - u));
        let upper = x - z(u - omega * u);
        inside += usize::from(upper <= theta);
        touch += usize::from(lower <= theta);
    }
    Ok(pair_from_counts(inside, touch, mc.inner))
}

fn pair_from_counts(inside: usize, touch: usize, draws: usize) -> BeliefPair {
    let bel = inside as f64 / draws as f64;
    let pl = touch as f64 / draws as f64;
    BeliefPair {
        belief: bel,
        plausibility: pl,
        belief_se: binomial_se(bel, draws),
        plausibility_se: binomial_se(pl, draws),
        conflict_mass: 0.0,
    }
}

/// Bernoulli, `A = {Θ ≤ θ}`, weakened focal interval
/// `[U_(N)(1-ω), U_(N+1) + ω(1-U_(N+1))]` with `U_(N) ~ Beta(N, n-N+1)`.
pub fn bernoulli_belief(n: usize, successes: usize, theta: f64, omega: f64) -> Result<BeliefPair> {
    check_omega_unit(omega)?;
    if successes > n {
        return Err(Error::domain(format!("success count {successes} exceeds n = {n}")));
    }
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::domain(format!("Bernoulli threshold must lie in [0,1], got {theta}")));
    }
    let (nf, k) = (n as f64, successes as f64);
    // upper endpoint ≤ θ  ⇔  U_(N+1) ≤ (θ-ω)/(1-ω); U_(n+1) = 1
    let bel = if successes == n || omega == 1.0 {
        f64::from(u8::from(theta >= 1.0))
    } else if theta < omega {
        0.0
    } else {
        IncBeta::new(k + 1.0, nf - k)?.cdf((theta - omega) / (1.0 - omega))
    };
    // lower endpoint ≤ θ  ⇔  U_(N) ≤ θ/(1-ω); U_(0) = 0
    let pl = if successes == 0 || omega == 1.0 {
        1.0
    } else {
        IncBeta::new(k, nf - k + 1.0)?.cdf((theta / (1.0 - omega)).min(1.0))
    };
    Ok(BeliefPair::exact(bel, pl))
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.len() < 2 {
        return Err(Error::domain("homogeneity needs at least two observations"));
    }
    if let Some(bad) = times.iter().find(|&&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::domain(format!("inter-arrival times must be positive, got {bad}")));
    }
    Ok(())
}

/// `P̂ = X / ΣX`.
pub fn normalized(times: &[f64]) -> Vec<f64> {
    let total: f64 = times.iter().sum();
    times.iter().map(|&t| t / total).collect()
}

/// Homogeneity of exponential rates: `bel = 0` and
/// `pl = μ{P : K(P, P̂) ≤ ω}` over `mc.inner` fresh simplex draws.
pub fn homogeneity_plausibility<R: Rng + ?Sized>(
    times: &[f64],
    omega: f64,
    mc: &MonteCarloParams,
    rng: &mut R,
) -> Result<BeliefPair> {
    check_times(times)?;
    check_omega_nonneg(omega)?;
    mc.check_inner()?;
    if omega == f64::INFINITY {
        return Ok(BeliefPair::exact(0.0, 1.0));
    }
    let pool = KlPool::sample(times.len(), mc.inner, rng);
    homogeneity_plausibility_pooled(times, omega, &pool)
}

/// [`homogeneity_plausibility`] against a caller-owned pool of simplex draws.
pub fn homogeneity_plausibility_pooled(times: &[f64], omega: f64, pool: &KlPool) -> Result<BeliefPair> {
    check_times(times)?;
    check_omega_nonneg(omega)?;
    if pool.dim() != times.len() {
        return Err(Error::Config("simplex pool dimension does not match the data".into()));
    }
    if omega == f64::INFINITY {
        return Ok(BeliefPair::exact(0.0, 1.0));
    }
    let logs = KlPool::target_logs(&normalized(times));
    let hits = pool.covered_count(&logs, omega);
    Ok(pair_from_counts(0, hits, pool.len()))
}

/// Decision of a belief-based test together with its evidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestDecision {
    pub reject: bool,
    pub omega: f64,
    pub evidence: BeliefPair,
}

fn calibrated_omega(calib: &CalibrationResult, shape: PrsShape, n: usize, alpha: f64) -> Result<f64> {
    if calib.family.shape != shape || calib.family.dim != n {
        return Err(Error::Config(format!(
            "calibration is for a {} PRS of dimension {}, data need {} of dimension {n}",
            calib.family.shape.name(),
            calib.family.dim,
            shape.name()
        )));
    }
    if (calib.alpha - alpha).abs() > 1e-12 {
        return Err(Error::Config(format!(
            "calibration level {} does not match test level {alpha}",
            calib.alpha
        )));
    }
    if !calib.converged {
        return Err(Error::Calibration(Box::new(calib.clone())));
    }
    Ok(calib.omega_star)
}

/// Reject `{Θ_1 = ⋯ = Θ_n}` when its plausibility falls below `alpha`.
pub fn homogeneity_test<R: Rng + ?Sized>(
    times: &[f64],
    alpha: f64,
    calib: &CalibrationResult,
    mc: &MonteCarloParams,
    rng: &mut R,
) -> Result<TestDecision> {
    check_times(times)?;
    let omega = calibrated_omega(calib, PrsShape::KlBall, times.len(), alpha)?;
    let evidence = homogeneity_plausibility(times, omega, mc, rng)?;
    Ok(TestDecision { reject: evidence.plausibility < alpha, omega, evidence })
}

/// `F0(X_(1)) ≤ ⋯ ≤ F0(X_(n))`.
pub fn probability_transform(values: &[f64], f0: &Cdf) -> Result<Vec<f64>> {
    f0.validate()?;
    if values.is_empty() {
        return Err(Error::domain("one-sample data must be nonempty"));
    }
    let mut t = values.iter().map(|&x| f0.cdf(x)).collect::<Result<Vec<_>>>()?;
    t.sort_by(f64::total_cmp);
    Ok(t)
}

/// One-sample goodness of fit of the simple null `F = F0`.
///
/// `bel = 0`; `pl` is the fraction of `mc.inner` hierarchical beta-box draws
/// whose box contains `(F0(X_(1)), …, F0(X_(n)))`. With
/// `mc.conflict_probe > 0`, that many extra draws are checked for boxes
/// admitting no nondecreasing CDF and `pl` is divided by the non-empty mass.
pub fn onesample_plausibility<R: Rng + ?Sized>(
    values: &[f64],
    f0: &Cdf,
    omega: f64,
    mc: &MonteCarloParams,
    rng: &mut R,
) -> Result<BeliefPair> {
    check_omega_nonneg(omega)?;
    mc.check_inner()?;
    let t = probability_transform(values, f0)?;
    if omega == f64::INFINITY {
        return Ok(BeliefPair::exact(0.0, 1.0));
    }
    let pool = BoxPool::sample(t.len(), mc.inner, rng);
    let conflict = if mc.conflict_probe > 0 {
        conflict_mass(t.len(), omega, &ties(values), mc.conflict_probe, rng)?
    } else {
        0.0
    };
    pooled_onesample(&t, omega, &pool, conflict)
}

/// [`onesample_plausibility`] against a caller-owned pool of box draws.
pub fn onesample_plausibility_pooled(values: &[f64], f0: &Cdf, omega: f64, pool: &BoxPool) -> Result<BeliefPair> {
    check_omega_nonneg(omega)?;
    let t = probability_transform(values, f0)?;
    if pool.dim() != t.len() {
        return Err(Error::Config("beta box pool dimension does not match the data".into()));
    }
    if omega == f64::INFINITY {
        return Ok(BeliefPair::exact(0.0, 1.0));
    }
    pooled_onesample(&t, omega, pool, 0.0)
}

fn pooled_onesample(t: &[f64], omega: f64, pool: &BoxPool, conflict: f64) -> Result<BeliefPair> {
    let target = pool.target_pvalues(t);
    let hits = pool.covered_count(&target, omega);
    let mut pair = pair_from_counts(0, hits, pool.len());
    if conflict > 0.0 {
        let keep = 1.0 - conflict;
        pair.plausibility = (pair.plausibility / keep).min(1.0);
        pair.plausibility_se /= keep;
    }
    pair.conflict_mass = conflict;
    Ok(pair)
}

// tied[i]: X_(i) == X_(i+1), so F must take one value on both
fn ties(values: &[f64]) -> Vec<bool> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.windows(2).map(|w| w[0] == w[1]).collect()
}

/// Fraction of hierarchical beta boxes, drawn directly with `qBeta`
/// endpoints, that contain no nondecreasing sequence (respecting ties).
pub fn conflict_mass<R: Rng + ?Sized>(n: usize, omega: f64, tied: &[bool], draws: usize, rng: &mut R) -> Result<f64> {
    check_omega_nonneg(omega)?;
    if draws == 0 {
        return Ok(0.0);
    }
    let family = crate::prs::PrsFamily::beta_box_hier(n, omega);
    let mut empty = 0usize;
    for _ in 0..draws {
        let d = crate::prs::draw(&family, rng)?;
        let bounds = d.beta_box_u_bounds().expect("beta box draw");
        if !admits_nondecreasing(&bounds, tied) {
            empty += 1;
        }
    }
    Ok(empty as f64 / draws as f64)
}

fn admits_nondecreasing(bounds: &[(f64, f64)], tied: &[bool]) -> bool {
    // greedy: smallest feasible value at each step
    let mut level = f64::NEG_INFINITY;
    let mut i = 0;
    while i < bounds.len() {
        let (mut lo, mut hi) = bounds[i];
        while i < tied.len() && tied[i] {
            i += 1;
            lo = lo.max(bounds[i].0);
            hi = hi.min(bounds[i].1);
        }
        level = level.max(lo);
        if level > hi {
            return false;
        }
        i += 1;
    }
    true
}

/// Reject `F = F0` when its plausibility falls below `alpha`.
pub fn onesample_test<R: Rng + ?Sized>(
    values: &[f64],
    f0: &Cdf,
    alpha: f64,
    calib: &CalibrationResult,
    mc: &MonteCarloParams,
    rng: &mut R,
) -> Result<TestDecision> {
    let omega = calibrated_omega(calib, PrsShape::BetaBoxHier, values.len(), alpha)?;
    let evidence = onesample_plausibility(values, f0, omega, mc, rng)?;
    Ok(TestDecision { reject: evidence.plausibility < alpha, omega, evidence })
}

/// Belief and plausibility of any supported (data, assertion) pair.
///
/// `omega` indexes the model's PRS family. Normal and Bernoulli pairs are
/// closed form; homogeneity and one-sample pairs use `mc.inner` PRS draws.
pub fn posterior<R: Rng + ?Sized>(
    data: &ObservedData,
    assertion: &Assertion,
    omega: f64,
    mc: &MonteCarloParams,
    rng: &mut R,
) -> Result<BeliefPair> {
    data.validate()?;
    let base = match (data, assertion.kind) {
        (ObservedData::Normal { x }, AssertionKind::LeTheta { theta }) => normal_belief(*x, theta, omega)?,
        (ObservedData::Normal { x }, AssertionKind::Singleton { value }) => {
            check_omega_unit(omega)?;
            // θ ∈ focal interval  ⇔  S_ω(U) ∋ Φ(x - θ)
            let pl = 1.0 - interval_noncoverage(phi(x - value), omega);
            BeliefPair::exact(0.0, if omega == 0.0 { 0.0 } else { pl })
        }
        (ObservedData::Bernoulli { n, successes }, AssertionKind::LeTheta { theta }) => {
            bernoulli_belief(*n, *successes, theta, omega)?
        }
        (ObservedData::Bernoulli { n, successes }, AssertionKind::Singleton { value }) => {
            // P(lower ≤ θ ≤ upper) = pl(Θ ≤ θ) - bel(Θ ≤ θ) for θ < 1
            // and at θ = 1 the upper endpoint reaches 1 only when N = n or ω = 1
            let le = bernoulli_belief(*n, *successes, value, omega)?;
            let pl = if value >= 1.0 {
                f64::from(u8::from(successes == n || omega == 1.0))
            } else {
                le.plausibility - le.belief
            };
            BeliefPair::exact(0.0, pl.clamp(0.0, 1.0))
        }
        (ObservedData::Homogeneity { times }, AssertionKind::Homogeneity) => {
            homogeneity_plausibility(times, omega, mc, rng)?
        }
        (ObservedData::OneSample { values }, AssertionKind::CdfEquals { cdf }) => {
            onesample_plausibility(values, &cdf, omega, mc, rng)?
        }
        _ => return Err(Error::domain("assertion does not apply to this model")),
    };
    Ok(if assertion.negated { base.complement() } else { base })
}

#[cfg(test)]
mod tests;
