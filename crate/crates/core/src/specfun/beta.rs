use crate::{Error, Result};

/// `ln Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> f64 {
    libm::lgamma_r(x).0
}

fn ln_beta(a: f64, b: f64) -> f64 {
    log_gamma(a) + log_gamma(b) - log_gamma(a + b)
}

/// Regularized incomplete beta function `I_x(a, b) = P(Beta(a, b) ≤ x)`.
pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    check_params(a, b)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("incomplete beta needs 0 <= x <= 1, got {x}")));
    }
    Ok(IncBeta::new_unchecked(a, b).cdf(x))
}

/// Inverse of [`reg_inc_beta`] in `x`; 0 at `p = 0` and 1 at `p = 1`.
pub fn inv_reg_inc_beta(p: f64, a: f64, b: f64) -> Result<f64> {
    check_params(a, b)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("beta quantile needs 0 <= p <= 1, got {p}")));
    }
    Ok(IncBeta::new_unchecked(a, b).quantile(p))
}

fn check_params(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::domain(format!("beta shape parameters must be positive, got ({a}, {b})")));
    }
    Ok(())
}

/// Beta(a, b) law with its normalizing constant cached, for hot loops that
/// evaluate the same `(a, b)` many times.
#[derive(Debug, Clone, Copy)]
pub struct IncBeta {
    a: f64,
    b: f64,
    ln_beta: f64,
}

impl IncBeta {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        check_params(a, b)?;
        Ok(Self::new_unchecked(a, b))
    }

    pub(crate) fn new_unchecked(a: f64, b: f64) -> Self {
        Self {
            a,
            b,
            ln_beta: ln_beta(a, b),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let (a, b) = (self.a, self.b);
        let ln_front = a * x.ln() + b * (-x).ln_1p() - self.ln_beta;
        if x > a / (a + b) {
            1.0 - ln_front.exp() * cont_frac(b, a, 1.0 - x) / b
        } else {
            ln_front.exp() * cont_frac(a, b, x) / a
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 || x >= 1.0 {
            return 0.0;
        }
        ((self.a - 1.0) * x.ln() + (self.b - 1.0) * (-x).ln_1p() - self.ln_beta).exp()
    }

    /// Bracketed Newton iteration: a Newton step is accepted only when it
    /// stays strictly inside the current bracket, otherwise bisect.
    pub fn quantile(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return 0.0;
        }
        if p >= 1.0 {
            return 1.0;
        }
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        let mut x = self.a / (self.a + self.b);
        for _ in 0..200 {
            let f = self.cdf(x) - p;
            if f.abs() <= 1e-14 {
                return x;
            }
            if f < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            if hi - lo <= 1e-16 * x.max(1e-300) {
                return x;
            }
            let d = self.pdf(x);
            let newton = if d > 0.0 && d.is_finite() { x - f / d } else { f64::NAN };
            x = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        x
    }
}

// Modified Lentz evaluation of the incomplete-beta continued fraction.
fn cont_frac(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 1000;
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}
