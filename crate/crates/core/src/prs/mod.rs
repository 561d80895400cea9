//! Predictive random set (PRS) families `S_ω`.
//!
//! A family widens a draw `U ~ μ` of the auxiliary variable into a set
//! `S_ω(U)` that contains `U`. The index `ω` runs from the conventional belief
//! (a point) to the vacuous one (the whole space) where the family allows it:
//!
//! | shape           | aux space              | Ω            | vacuous at |
//! |-----------------|------------------------|--------------|------------|
//! | `Interval`      | `[0,1]`                | `[0,1]`      | `ω = 1`    |
//! | `Rectangle`     | `[0,1]^n`              | `[0,1]`      | `ω = 1`    |
//! | `KlBall`        | `[0,∞) × P_{n-1}`      | `[0,∞]`      | `ω = ∞`    |
//! | `BetaBoxHier`   | ordered `[0,1]^n`      | `[0,∞]`      | `ω = ∞`    |
//!
//! `ω = f64::INFINITY` is the "always contains" sentinel.

mod pool;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::specfun::{fill_ordered_uniforms, fill_uniform_simplex, open01, sample_gamma, IncBeta};
use crate::{binomial_se, Error, MonteCarloParams, Result};

pub use pool::{BoxPool, KlPool};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrsShape {
    Point,
    Vacuous,
    Interval,
    Rectangle,
    KlBall,
    BetaBoxHier,
}

impl PrsShape {
    pub fn name(self) -> &'static str {
        match self {
            PrsShape::Point => "point",
            PrsShape::Vacuous => "vacuous",
            PrsShape::Interval => "interval",
            PrsShape::Rectangle => "rectangle",
            PrsShape::KlBall => "kl-ball",
            PrsShape::BetaBoxHier => "beta-box-hier",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "point" => PrsShape::Point,
            "vacuous" => PrsShape::Vacuous,
            "interval" => PrsShape::Interval,
            "rectangle" => PrsShape::Rectangle,
            "kl-ball" | "kl" => PrsShape::KlBall,
            "beta-box-hier" | "beta-box" => PrsShape::BetaBoxHier,
            other => return Err(Error::domain(format!("unknown PRS shape `{other}`"))),
        })
    }
}

/// One member `S_ω` of a PRS family: shape, dimension of the auxiliary
/// space and the weakening index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrsFamily {
    pub shape: PrsShape,
    pub dim: usize,
    pub omega: f64,
}

impl PrsFamily {
    pub fn point(dim: usize) -> Self {
        Self { shape: PrsShape::Point, dim, omega: 0.0 }
    }

    pub fn vacuous(dim: usize) -> Self {
        Self { shape: PrsShape::Vacuous, dim, omega: 1.0 }
    }

    pub fn interval(omega: f64) -> Self {
        Self { shape: PrsShape::Interval, dim: 1, omega }
    }

    pub fn rectangle(dim: usize, omega: f64) -> Self {
        Self { shape: PrsShape::Rectangle, dim, omega }
    }

    pub fn kl_ball(dim: usize, omega: f64) -> Self {
        Self { shape: PrsShape::KlBall, dim, omega }
    }

    pub fn beta_box_hier(dim: usize, omega: f64) -> Self {
        Self { shape: PrsShape::BetaBoxHier, dim, omega }
    }

    pub fn with_omega(self, omega: f64) -> Self {
        Self { omega, ..self }
    }

    /// Index of the vacuous member, when the family has a free index.
    pub fn vacuous_omega(&self) -> Option<f64> {
        match self.shape {
            PrsShape::Interval | PrsShape::Rectangle => Some(1.0),
            PrsShape::KlBall | PrsShape::BetaBoxHier => Some(f64::INFINITY),
            PrsShape::Point | PrsShape::Vacuous => None,
        }
    }

    pub fn is_vacuous(&self) -> bool {
        match self.shape {
            PrsShape::Vacuous => true,
            PrsShape::Point => false,
            _ => Some(self.omega) == self.vacuous_omega(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.omega;
        match self.shape {
            PrsShape::Point | PrsShape::Vacuous => {
                if self.dim < 1 {
                    return Err(Error::domain("PRS dimension must be >= 1"));
                }
            }
            PrsShape::Interval => {
                if self.dim != 1 {
                    return Err(Error::domain("interval PRS is one-dimensional; use rectangle"));
                }
                if !(0.0..=1.0).contains(&w) {
                    return Err(Error::domain(format!("interval index must lie in [0,1], got {w}")));
                }
            }
            PrsShape::Rectangle => {
                if self.dim < 1 {
                    return Err(Error::domain("rectangle dimension must be >= 1"));
                }
                if !(0.0..=1.0).contains(&w) {
                    return Err(Error::domain(format!("rectangle index must lie in [0,1], got {w}")));
                }
            }
            PrsShape::KlBall => {
                if self.dim < 2 {
                    return Err(Error::domain("KL-ball PRS needs a simplex of dimension n >= 2"));
                }
                if w.is_nan() || w < 0.0 {
                    return Err(Error::domain(format!("KL-ball index must lie in [0,inf], got {w}")));
                }
            }
            PrsShape::BetaBoxHier => {
                if self.dim < 1 {
                    return Err(Error::domain("beta box dimension must be >= 1"));
                }
                if w.is_nan() || w < 0.0 {
                    return Err(Error::domain(format!("beta box index must lie in [0,inf], got {w}")));
                }
            }
        }
        Ok(())
    }
}

/// A point of an auxiliary space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AuxPoint {
    /// Point of the unit cube `[0,1]^n`.
    Unit(Vec<f64>),
    /// `(R, P)` with `R >= 0` and `P` on the simplex.
    Simplex { r: f64, p: Vec<f64> },
    /// Nondecreasing vector of order statistics in `[0,1]^n`.
    Ordered(Vec<f64>),
}

impl AuxPoint {
    pub fn dim(&self) -> usize {
        self.coords().len()
    }

    pub fn coords(&self) -> &[f64] {
        match self {
            AuxPoint::Unit(v) | AuxPoint::Ordered(v) => v,
            AuxPoint::Simplex { p, .. } => p,
        }
    }
}

/// Draw `U ~ μ` of the pivotal measure matching `family`.
pub fn sample_center<R: Rng + ?Sized>(family: &PrsFamily, rng: &mut R) -> AuxPoint {
    let n = family.dim;
    match family.shape {
        PrsShape::Point | PrsShape::Vacuous | PrsShape::Interval | PrsShape::Rectangle => {
            AuxPoint::Unit((0..n).map(|_| open01(rng)).collect())
        }
        PrsShape::KlBall => {
            let r = sample_gamma(n as f64, rng).expect("n >= 2");
            let mut p = Vec::with_capacity(n);
            fill_uniform_simplex(&mut p, n, rng);
            AuxPoint::Simplex { r, p }
        }
        PrsShape::BetaBoxHier => {
            let mut u = Vec::with_capacity(n);
            fill_ordered_uniforms(&mut u, n, rng);
            AuxPoint::Ordered(u)
        }
    }
}

/// Hierarchical level `Z = (1 + V)/2` with `V ~ Beta(ω, 1)`, sampled by
/// inversion `V = W^{1/ω}` so that replaying `W` gives `Z` nondecreasing in `ω`.
pub fn hier_level(w: f64, omega: f64) -> f64 {
    if omega == f64::INFINITY {
        return 1.0;
    }
    if omega <= 0.0 {
        return 0.5;
    }
    0.5 * (1.0 + w.powf(1.0 / omega))
}

/// A realized set `S_ω(U)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrsDraw {
    pub family: PrsFamily,
    pub center: AuxPoint,
    /// Hierarchical level `z ∈ [0.5, 1]`, only for `BetaBoxHier`.
    pub z: Option<f64>,
    // pBeta(u_(i) | i, n+1-i) of the center, only for `BetaBoxHier`
    center_p: Vec<f64>,
}

/// Sample a PRS: the center from the pivotal measure, then the hierarchical
/// level when the family has one.
pub fn draw<R: Rng + ?Sized>(family: &PrsFamily, rng: &mut R) -> Result<PrsDraw> {
    family.validate()?;
    let center = sample_center(family, rng);
    let (z, center_p) = if family.shape == PrsShape::BetaBoxHier {
        let z = hier_level(open01(rng), family.omega);
        let betas = order_stat_laws(family.dim);
        let p = center.coords().iter().zip(&betas).map(|(&u, b)| b.cdf(u)).collect();
        (Some(z), p)
    } else {
        (None, Vec::new())
    };
    Ok(PrsDraw { family: *family, center, z, center_p })
}

/// Beta(i, n+1-i) laws of the order statistics `U_(i)`, `i = 1..=n`.
pub(crate) fn order_stat_laws(n: usize) -> Vec<IncBeta> {
    (1..=n)
        .map(|i| IncBeta::new_unchecked(i as f64, (n + 1 - i) as f64))
        .collect()
}

impl PrsDraw {
    /// Interval endpoints of a box-shaped draw in its own coordinates
    /// (`u`-space for interval/rectangle, `p`-space for the beta box).
    pub fn box_bounds(&self) -> Option<Vec<(f64, f64)>> {
        let w = self.family.omega;
        match self.family.shape {
            PrsShape::Interval | PrsShape::Rectangle => Some(
                self.center
                    .coords()
                    .iter()
                    .map(|&u| (u - w * u, u + w * (1.0 - u)))
                    .collect(),
            ),
            PrsShape::BetaBoxHier => {
                let z = self.z.unwrap_or(0.5);
                Some(self.center_p.iter().map(|&p| (p - z * p, p + z * (1.0 - p))).collect())
            }
            _ => None,
        }
    }

    /// Box endpoints `[A_i(z), B_i(z)]` of a beta-box draw mapped back to the
    /// `u`-space with beta quantiles.
    pub fn beta_box_u_bounds(&self) -> Option<Vec<(f64, f64)>> {
        if self.family.shape != PrsShape::BetaBoxHier {
            return None;
        }
        let betas = order_stat_laws(self.family.dim);
        let bounds = self.box_bounds()?;
        Some(
            bounds
                .iter()
                .zip(&betas)
                .map(|(&(lo, hi), b)| (b.quantile(lo), b.quantile(hi)))
                .collect(),
        )
    }

    pub fn contains(&self, u: &AuxPoint) -> Result<bool> {
        contains(self, u)
    }
}

/// Membership `u ∈ S_ω(U)`.
pub fn contains(draw: &PrsDraw, u: &AuxPoint) -> Result<bool> {
    let fam = &draw.family;
    if u.dim() != fam.dim {
        return Err(Error::domain(format!(
            "point of dimension {} tested against a PRS of dimension {}",
            u.dim(),
            fam.dim
        )));
    }
    match (fam.shape, u) {
        (PrsShape::Vacuous, _) => Ok(true),
        (PrsShape::Point, _) => Ok(draw.center.coords() == u.coords()),
        (PrsShape::Interval | PrsShape::Rectangle, AuxPoint::Unit(v)) => {
            let w = fam.omega;
            Ok(draw
                .center
                .coords()
                .iter()
                .zip(v)
                .all(|(&c, &x)| c - w * c <= x && x <= c + w * (1.0 - c)))
        }
        (PrsShape::KlBall, AuxPoint::Simplex { p, .. }) => {
            if fam.omega == f64::INFINITY {
                return Ok(true);
            }
            Ok(kl_divergence(draw.center.coords(), p)? <= fam.omega)
        }
        (PrsShape::BetaBoxHier, AuxPoint::Ordered(v)) => {
            if v.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::domain("beta box membership needs an ordered vector"));
            }
            let z = draw.z.unwrap_or(0.5);
            let betas = order_stat_laws(fam.dim);
            Ok(draw
                .center_p
                .iter()
                .zip(v)
                .zip(&betas)
                .all(|((&p, &x), b)| {
                    let t = b.cdf(x);
                    p - z * p <= t && t <= p + z * (1.0 - p)
                }))
        }
        (shape, _) => Err(Error::domain(format!(
            "auxiliary point kind does not match the {} PRS",
            shape.name()
        ))),
    }
}

/// Kullback–Leibler divergence `K(P, p) = Σ P_i log(P_i / p_i)` on the
/// simplex, with `0 log 0 = 0` and `+∞` when `p_i = 0 < P_i`.
pub fn kl_divergence(big_p: &[f64], p: &[f64]) -> Result<f64> {
    if big_p.len() != p.len() {
        return Err(Error::domain("KL divergence between simplices of different dimension"));
    }
    check_simplex(big_p)?;
    check_simplex(p)?;
    Ok(kl_unchecked(big_p, p))
}

pub(crate) fn kl_unchecked(big_p: &[f64], p: &[f64]) -> f64 {
    let mut k = 0.0;
    for (&a, &b) in big_p.iter().zip(p) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            k += a * (a / b).ln();
        }
    }
    k.max(0.0)
}

fn check_simplex(p: &[f64]) -> Result<()> {
    if p.iter().any(|&v| !(v >= 0.0)) {
        return Err(Error::domain("simplex point has a negative or NaN component"));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(Error::domain(format!("simplex point sums to {s}, not 1")));
    }
    Ok(())
}

/// Probability estimate with its standard error (zero for closed forms).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub se: f64,
    pub draws: usize,
}

impl McEstimate {
    pub fn exact(value: f64) -> Self {
        Self { value, se: 0.0, draws: 0 }
    }

    pub fn from_count(hits: usize, draws: usize) -> Self {
        let value = hits as f64 / draws as f64;
        Self { value, se: binomial_se(value, draws), draws }
    }
}

/// Closed-form noncoverage of the interval PRS at target `u ∈ [0,1]`.
pub fn interval_noncoverage(u: f64, omega: f64) -> f64 {
    if omega >= 1.0 {
        return 0.0;
    }
    let s = 1.0 - omega;
    let cover = ((u / s).min(1.0) - ((u - omega) / s).max(0.0)).max(0.0);
    (1.0 - cover).clamp(0.0, 1.0)
}

/// Noncoverage probability `Q_ω(u) = μ{U : S_ω(U) ∌ u}`.
///
/// Exact for the point, vacuous, interval and rectangle families; Monte Carlo
/// over `mc.inner` PRS draws for the KL ball and the hierarchical beta box.
pub fn noncoverage<R: Rng + ?Sized>(
    family: &PrsFamily,
    u: &AuxPoint,
    mc: &MonteCarloParams,
    rng: &mut R,
) -> Result<McEstimate> {
    mc.check_inner()?;
    family.validate()?;
    if u.dim() != family.dim {
        return Err(Error::domain("target dimension does not match the PRS family"));
    }
    if family.is_vacuous() {
        return Ok(McEstimate::exact(0.0));
    }
    match (family.shape, u) {
        // a continuous center hits a fixed target with probability zero
        (PrsShape::Point, _) => Ok(McEstimate::exact(1.0)),
        (PrsShape::Interval | PrsShape::Rectangle, AuxPoint::Unit(v)) => {
            let cover: f64 = v.iter().map(|&x| 1.0 - interval_noncoverage(x, family.omega)).product();
            Ok(McEstimate::exact(1.0 - cover))
        }
        (PrsShape::KlBall, AuxPoint::Simplex { p, .. }) => {
            check_simplex(p)?;
            let pool = KlPool::sample(family.dim, mc.inner, rng);
            let covered = pool.covered_count(&KlPool::target_logs(p), family.omega);
            Ok(McEstimate::from_count(mc.inner - covered, mc.inner))
        }
        (PrsShape::BetaBoxHier, AuxPoint::Ordered(_)) => mixture_noncoverage(
            family.dim,
            ZLaw::Beta { omega: family.omega },
            u,
            mc,
            rng,
        ),
        (shape, _) => Err(Error::domain(format!(
            "auxiliary point kind does not match the {} PRS",
            shape.name()
        ))),
    }
}

/// Mixing law `λ` of the hierarchical level `Z` of the beta box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ZLaw {
    /// `Z = (1 + V)/2`, `V ~ Beta(ω, 1)`.
    Beta { omega: f64 },
    /// Degenerate `λ`: `Z = z` always.
    PointMass { z: f64 },
}

impl ZLaw {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ZLaw::Beta { omega } => hier_level(open01(rng), omega),
            ZLaw::PointMass { z } => z,
        }
    }
}

/// Mixture noncoverage `Q̄(u) = ∫ Q_z(u) dλ(z)` of the beta box, estimated by
/// sampling `(Ũ, Z)` jointly and averaging miss indicators.
pub fn mixture_noncoverage<R: Rng + ?Sized>(
    n: usize,
    law: ZLaw,
    u: &AuxPoint,
    mc: &MonteCarloParams,
    rng: &mut R,
) -> Result<McEstimate> {
    mc.check_inner()?;
    let AuxPoint::Ordered(target) = u else {
        return Err(Error::domain("beta box noncoverage needs an ordered target"));
    };
    if target.len() != n {
        return Err(Error::domain("target dimension does not match the beta box"));
    }
    if let ZLaw::PointMass { z } = law {
        if !(0.5..=1.0).contains(&z) {
            return Err(Error::domain(format!("hierarchical level must lie in [0.5, 1], got {z}")));
        }
    }
    let betas = order_stat_laws(n);
    let target_p: Vec<f64> = target.iter().zip(&betas).map(|(&x, b)| b.cdf(x)).collect();
    let mut center = Vec::with_capacity(n);
    let mut misses = 0usize;
    for _ in 0..mc.inner {
        fill_ordered_uniforms(&mut center, n, rng);
        let z = law.sample(rng);
        let hit = center.iter().zip(&betas).zip(&target_p).all(|((&c, b), &t)| {
            let p = b.cdf(c);
            p - z * p <= t && t <= p + z * (1.0 - p)
        });
        if !hit {
            misses += 1;
        }
    }
    Ok(McEstimate::from_count(misses, mc.inner))
}
