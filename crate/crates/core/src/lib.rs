//! Statistical inference with weak beliefs.
//!
//! The crate builds posterior belief and plausibility functions from an
//! a-equation `X = a(Θ, U)` whose auxiliary variable `U` has a fully known
//! pivotal measure. Instead of predicting the unobserved `U*` with a single
//! draw, each draw is widened into a predictive random set (PRS) `S_ω(U)`.
//! The index `ω` controls the degree of weakening and is calibrated so that
//! the resulting belief function is credible at a chosen level `α` while
//! being as efficient as possible (the maximal-belief method).
//!
//! Modules, bottom-up:
//!
//! - [`specfun`]: normal and beta special functions plus seeded samplers
//!   driven by the splittable [`RngStream`].
//! - [`prs`]: predictive random set families (point, vacuous, interval,
//!   rectangle, KL-ball, hierarchical beta box) with draw, membership and
//!   noncoverage.
//! - [`calibrate`]: the credibility function `φ_α(ω)` and a Robbins–Monro
//!   solver for `φ_α(ω) = α`.
//! - [`models`]: normal mean, Bernoulli, homogeneity of exponential rates and
//!   the one-sample goodness-of-fit model.
//! - [`baselines`]: likelihood-ratio, Kolmogorov–Smirnov, Anderson–Darling and
//!   Cramér–von Mises tests with Monte Carlo critical values.
//! - [`harness`]: experiment runs with CSV/JSON output and SVG plots.

pub mod baselines;
pub mod calibrate;
mod error;
pub mod harness;
pub mod models;
pub mod prs;
pub mod specfun;

pub use error::{Error, Result};
pub use specfun::RngStream;

/// Monte Carlo sizes shared by every estimator in the crate.
///
/// `outer` counts draws of the target `U* ~ μ`; `inner` counts PRS draws used
/// to estimate a noncoverage probability or a plausibility.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MonteCarloParams {
    pub outer: usize,
    pub inner: usize,
    /// Number of one-sample PRS draws checked for empty focal elements
    /// (requires `2n` beta quantiles per draw, so it is kept small).
    #[serde(default)]
    pub conflict_probe: usize,
}

impl MonteCarloParams {
    pub const MIN_INNER: usize = 100;
    pub const MIN_OUTER: usize = 100;

    pub fn new(outer: usize, inner: usize) -> Self {
        Self {
            outer,
            inner,
            conflict_probe: 0,
        }
    }

    pub(crate) fn check_inner(&self) -> Result<()> {
        if self.inner < Self::MIN_INNER {
            return Err(Error::Config(format!(
                "mc.inner = {} is below the minimum of {}",
                self.inner,
                Self::MIN_INNER
            )));
        }
        Ok(())
    }

    pub(crate) fn check_outer(&self) -> Result<()> {
        if self.outer < Self::MIN_OUTER {
            return Err(Error::Config(format!(
                "mc.outer = {} is below the minimum of {}",
                self.outer,
                Self::MIN_OUTER
            )));
        }
        Ok(())
    }
}

impl Default for MonteCarloParams {
    fn default() -> Self {
        Self::new(10_000, 10_000)
    }
}

/// Binomial standard error of a frequency estimate.
pub(crate) fn binomial_se(p: f64, draws: usize) -> f64 {
    if draws == 0 {
        return 0.0;
    }
    (p * (1.0 - p) / draws as f64).max(0.0).sqrt()
}
