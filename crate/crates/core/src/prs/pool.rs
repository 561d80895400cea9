//! Reusable Monte Carlo samples of PRS draws.
//!
//! Both pooled families nest in `ω`, so every pooled draw `j` has an index
//! threshold `τ_j` with `S_ω(U_j) ∋ target ⇔ ω ≥ τ_j`. A pool therefore turns
//! one target into a vector of thresholds from which the noncoverage at any
//! `ω` is a count, and credibility curves computed from a fixed pool are
//! exactly monotone.

use rand::Rng;

use super::{hier_level, order_stat_laws};
use crate::specfun::{fill_ordered_uniforms, fill_uniform_simplex, open01, IncBeta};

/// Pool of `P ~ Unif(P_{n-1})` centers of the KL-ball PRS.
#[derive(Debug, Clone)]
pub struct KlPool {
    n: usize,
    points: Vec<f64>,
    // Σ_i P_i log P_i per draw
    neg_entropy: Vec<f64>,
}

impl KlPool {
    pub fn sample<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Self {
        let mut points = Vec::with_capacity(n * m);
        let mut neg_entropy = Vec::with_capacity(m);
        let mut p = Vec::with_capacity(n);
        for _ in 0..m {
            fill_uniform_simplex(&mut p, n, rng);
            neg_entropy.push(p.iter().filter(|&&v| v > 0.0).map(|&v| v * v.ln()).sum());
            points.extend_from_slice(&p);
        }
        Self { n, points, neg_entropy }
    }

    pub fn len(&self) -> usize {
        self.neg_entropy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neg_entropy.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `log p_i`, the form in which targets enter [`KlPool::thresholds`].
    pub fn target_logs(p: &[f64]) -> Vec<f64> {
        p.iter().map(|&v| if v > 0.0 { v.ln() } else { f64::NEG_INFINITY }).collect()
    }

    /// `τ_j = K(P_j, p)`: the ball around `P_j` reaches `p` once `ω ≥ τ_j`.
    pub fn thresholds(&self, log_target: &[f64], out: &mut Vec<f64>) {
        debug_assert_eq!(log_target.len(), self.n);
        out.clear();
        out.extend(self.points.chunks_exact(self.n).zip(&self.neg_entropy).map(|(row, &h)| {
            let cross: f64 = row.iter().zip(log_target).map(|(&a, &b)| a * b).sum();
            let k = h - cross;
            if k.is_nan() {
                f64::INFINITY
            } else {
                k.max(0.0)
            }
        }));
    }

    /// `K(P_j, p)` for pooled draw `j`.
    pub fn divergence(&self, j: usize, log_target: &[f64]) -> f64 {
        let row = &self.points[j * self.n..(j + 1) * self.n];
        let cross: f64 = row.iter().zip(log_target).map(|(&a, &b)| a * b).sum();
        let k = self.neg_entropy[j] - cross;
        if k.is_nan() {
            f64::INFINITY
        } else {
            k.max(0.0)
        }
    }

    pub fn covered_count(&self, log_target: &[f64], omega: f64) -> usize {
        if omega == f64::INFINITY {
            return self.len();
        }
        let mut tau = Vec::with_capacity(self.len());
        self.thresholds(log_target, &mut tau);
        tau.iter().filter(|&&t| t <= omega).count()
    }
}

/// Pool of hierarchical beta-box draws `(Ũ_j, W_j)`, stored in `p`-space:
/// `p_ji = pBeta(U_j,(i) | i, n+1-i)` and `Z_j = (1 + W_j^{1/ω})/2`.
#[derive(Debug, Clone)]
pub struct BoxPool {
    n: usize,
    inv_p: Vec<f64>,
    inv_q: Vec<f64>,
    p: Vec<f64>,
    ln_w: Vec<f64>,
    w: Vec<f64>,
    betas: Vec<IncBeta>,
}

impl BoxPool {
    pub fn sample<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Self {
        let betas = order_stat_laws(n);
        let mut p = Vec::with_capacity(n * m);
        let mut inv_p = Vec::with_capacity(n * m);
        let mut inv_q = Vec::with_capacity(n * m);
        let mut ln_w = Vec::with_capacity(m);
        let mut w = Vec::with_capacity(m);
        let mut u = Vec::with_capacity(n);
        for _ in 0..m {
            fill_ordered_uniforms(&mut u, n, rng);
            let wj = open01(rng);
            for (&x, b) in u.iter().zip(&betas) {
                let pi = b.cdf(x);
                p.push(pi);
                inv_p.push(1.0 / pi);
                inv_q.push(1.0 / (1.0 - pi));
            }
            w.push(wj);
            ln_w.push(wj.ln());
        }
        Self { n, inv_p, inv_q, p, ln_w, w, betas }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `pBeta(u_(i) | i, n+1-i)` for an ordered target.
    pub fn target_pvalues(&self, ordered: &[f64]) -> Vec<f64> {
        ordered.iter().zip(&self.betas).map(|(&x, b)| b.cdf(x)).collect()
    }

    /// Smallest level `r_j` at which box `j` contains the target:
    /// `p(1-z) ≤ t ⇔ z ≥ 1 - t/p` and `t ≤ p + z(1-p) ⇔ z ≥ (t-p)/(1-p)`.
    pub fn required_levels(&self, target_p: &[f64], out: &mut Vec<f64>) {
        debug_assert_eq!(target_p.len(), self.n);
        let n = self.n;
        out.clear();
        out.extend(
            self.inv_p
                .chunks_exact(n)
                .zip(self.inv_q.chunks_exact(n))
                .zip(self.p.chunks_exact(n))
                .map(|((ip, iq), p)| {
                    let mut r = f64::NEG_INFINITY;
                    for i in 0..n {
                        let t = target_p[i];
                        let lo = 1.0 - t * ip[i];
                        let hi = (t - p[i]) * iq[i];
                        r = r.max(lo).max(hi);
                    }
                    r
                }),
        );
    }

    /// `τ_j` in `ω`: with `r = r_j`, box `j` contains the target iff
    /// `W_j^{1/ω} ≥ 2r - 1`, i.e. `ω ≥ ln W_j / ln(2r - 1)`.
    pub fn thresholds(&self, target_p: &[f64], out: &mut Vec<f64>) {
        self.required_levels(target_p, out);
        for (r, &lw) in out.iter_mut().zip(&self.ln_w) {
            let s = 2.0 * *r - 1.0;
            *r = if s <= 0.0 {
                0.0
            } else if s >= 1.0 {
                f64::INFINITY
            } else {
                lw / s.ln()
            };
        }
    }

    /// Levels `z_j` of every pooled draw at index `omega`.
    pub fn levels(&self, omega: f64) -> Vec<f64> {
        self.w.iter().map(|&w| hier_level(w, omega)).collect()
    }

    /// Whether box `j` at level `z` contains the target; stops at the first
    /// violated coordinate.
    pub fn covers(&self, j: usize, target_p: &[f64], z: f64) -> bool {
        let n = self.n;
        let range = j * n..(j + 1) * n;
        let (ip, iq, p) = (&self.inv_p[range.clone()], &self.inv_q[range.clone()], &self.p[range]);
        for i in 0..n {
            let t = target_p[i];
            if 1.0 - t * ip[i] > z || (t - p[i]) * iq[i] > z {
                return false;
            }
        }
        true
    }

    /// Count of pooled boxes containing the target at index `omega`.
    pub fn covered_count(&self, target_p: &[f64], omega: f64) -> usize {
        let mut r = Vec::with_capacity(self.len());
        self.required_levels(target_p, &mut r);
        r.iter()
            .zip(&self.w)
            .filter(|(&rj, &wj)| hier_level(wj, omega) >= rj)
            .count()
    }

    /// Count of pooled boxes containing the target when every draw uses the
    /// same level `z`.
    pub fn covered_count_fixed(&self, target_p: &[f64], z: f64) -> usize {
        let mut r = Vec::with_capacity(self.len());
        self.required_levels(target_p, &mut r);
        r.iter().filter(|&&rj| z >= rj).count()
    }

    /// Level `z_j` of pooled draw `j` at index `omega`.
    pub fn level(&self, j: usize, omega: f64) -> f64 {
        hier_level(self.w[j], omega)
    }

    /// `p`-space center of pooled draw `j`.
    pub fn center_p(&self, j: usize) -> &[f64] {
        &self.p[j * self.n..(j + 1) * self.n]
    }
}
