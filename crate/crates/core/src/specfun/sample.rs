use rand::Rng;
use rand_distr::{Beta, Distribution, Exp, Exp1, Gamma, Open01};

use crate::{Error, Result};

/// Uniform draw on the simplex `P_{n-1}`, i.e. `Dir(1_n)`: normalized i.i.d.
/// standard exponentials.
pub fn sample_uniform_simplex<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::domain(format!("simplex dimension n must be >= 2, got {n}")));
    }
    let mut p = Vec::with_capacity(n);
    fill_uniform_simplex(&mut p, n, rng);
    Ok(p)
}

pub(crate) fn fill_uniform_simplex<R: Rng + ?Sized>(out: &mut Vec<f64>, n: usize, rng: &mut R) {
    out.clear();
    let mut total = 0.0;
    for _ in 0..n {
        let e: f64 = Exp1.sample(rng);
        total += e;
        out.push(e);
    }
    let inv = 1.0 / total;
    for v in out.iter_mut() {
        *v *= inv;
    }
}

/// Sorted sample of `n` i.i.d. Unif(0,1) variates with the conventions
/// `U_(0) = 0` and `U_(n+1) = 1` available through [`OrderedUniforms::at`].
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedUniforms(Vec<f64>);

impl OrderedUniforms {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `U_(i)` for `i` in `0..=n+1`, 1-based like the order-statistic index.
    pub fn at(&self, i: usize) -> f64 {
        match i {
            0 => 0.0,
            i if i == self.0.len() + 1 => 1.0,
            i => self.0[i - 1],
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

pub fn sample_ordered_uniforms<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<OrderedUniforms> {
    if n < 1 {
        return Err(Error::domain("ordered uniforms need n >= 1"));
    }
    let mut v = Vec::with_capacity(n);
    fill_ordered_uniforms(&mut v, n, rng);
    Ok(OrderedUniforms(v))
}

pub(crate) fn fill_ordered_uniforms<R: Rng + ?Sized>(out: &mut Vec<f64>, n: usize, rng: &mut R) {
    out.clear();
    out.extend((0..n).map(|_| open01(rng)));
    out.sort_unstable_by(f64::total_cmp);
}

#[inline]
pub(crate) fn open01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Open01.sample(rng)
}

pub fn sample_beta<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> Result<f64> {
    let dist = Beta::new(a, b).map_err(|e| Error::domain(format!("beta({a}, {b}): {e}")))?;
    Ok(dist.sample(rng))
}

/// Gamma(shape, scale = 1).
pub fn sample_gamma<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> Result<f64> {
    let dist = Gamma::new(shape, 1.0).map_err(|e| Error::domain(format!("gamma({shape}): {e}")))?;
    Ok(dist.sample(rng))
}

pub fn sample_exponential<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> Result<f64> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::domain(format!("exponential rate must be positive, got {rate}")));
    }
    let dist = Exp::new(rate).map_err(|e| Error::domain(format!("exp({rate}): {e}")))?;
    Ok(dist.sample(rng))
}
