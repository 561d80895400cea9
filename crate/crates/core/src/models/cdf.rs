use std::fmt;

use serde::{Deserialize, Serialize};

use crate::specfun::{phi, phi_inv, IncBeta};
use crate::{Error, Result};

/// A continuous distribution on the real line, used both as the null `F0`
/// of the one-sample model and as a data-generating law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "kebab-case")]
pub enum Cdf {
    Uniform { lo: f64, hi: f64 },
    Beta { a: f64, b: f64 },
    Normal { mean: f64, sd: f64 },
    Exponential { rate: f64 },
}

impl Cdf {
    pub const UNIFORM: Cdf = Cdf::Uniform { lo: 0.0, hi: 1.0 };

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Cdf::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && lo < hi,
            Cdf::Beta { a, b } => a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite(),
            Cdf::Normal { mean, sd } => mean.is_finite() && sd > 0.0 && sd.is_finite(),
            Cdf::Exponential { rate } => rate > 0.0 && rate.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid distribution parameters: {self}")))
        }
    }

    /// `F(x)`; NaN input is a domain error.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::domain(format!("{self} cannot be evaluated at NaN")));
        }
        Ok(match *self {
            Cdf::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Cdf::Beta { a, b } => IncBeta::new(a, b)?.cdf(x),
            Cdf::Normal { mean, sd } => phi((x - mean) / sd),
            Cdf::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
        })
    }

    /// `F⁻¹(u)` for `u ∈ (0,1)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::domain(format!("quantile needs 0 < u < 1, got {u}")));
        }
        Ok(match *self {
            Cdf::Uniform { lo, hi } => lo + u * (hi - lo),
            Cdf::Beta { a, b } => IncBeta::new(a, b)?.quantile(u),
            Cdf::Normal { mean, sd } => mean + sd * phi_inv(u),
            Cdf::Exponential { rate } => -(-u).ln_1p() / rate,
        })
    }

    /// Parse `uniform(lo,hi)`, `beta(a,b)`, `normal(mean,sd)` or `exp(rate)`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::domain(format!("cannot parse distribution {s:?}"));
        let (name, rest) = s.split_once('(').ok_or_else(bad)?;
        let args = rest.strip_suffix(')').ok_or_else(bad)?;
        let args: Vec<f64> = args
            .split(',')
            .map(|a| a.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        let cdf = match (name.trim().to_ascii_lowercase().as_str(), args.as_slice()) {
            ("uniform" | "unif", &[lo, hi]) => Cdf::Uniform { lo, hi },
            ("beta", &[a, b]) => Cdf::Beta { a, b },
            ("normal" | "norm", &[mean, sd]) => Cdf::Normal { mean, sd },
            ("exp" | "exponential", &[rate]) => Cdf::Exponential { rate },
            _ => return Err(bad()),
        };
        cdf.validate()?;
        Ok(cdf)
    }
}

impl fmt::Display for Cdf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Cdf::Uniform { lo, hi } => write!(f, "uniform({lo},{hi})"),
            Cdf::Beta { a, b } => write!(f, "beta({a},{b})"),
            Cdf::Normal { mean, sd } => write!(f, "normal({mean},{sd})"),
            Cdf::Exponential { rate } => write!(f, "exp({rate})"),
        }
    }
}
