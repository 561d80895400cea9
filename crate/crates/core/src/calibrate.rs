//! Credibility of a PRS family and the maximal-belief index.
//!
//! `φ_α(ω) = μ{U* : Q_ω(U*) ≥ 1-α}` is the probability that the target of
//! prediction is badly missed. A family is credible at level `α` when
//! `φ_α(ω) ≤ α`; since `φ_α` is nonincreasing in `ω` for nested families, the
//! most efficient credible member solves `φ_α(ω) = α`, which [`solve_mb`] finds
//! by Robbins–Monro stochastic approximation.
//!
//! For the KL ball and the hierarchical beta box the inner noncoverage is a
//! Monte Carlo frequency over a pool of PRS draws held fixed while the outer
//! targets vary. `Q̂ ≥ 1-α` is then the integer condition "at most `⌊αm⌋` of
//! the `m` pooled sets contain the target", and the scan over the pool stops
//! as soon as that count is exceeded.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::prs::{interval_noncoverage, BoxPool, KlPool, PrsFamily, PrsShape};
use crate::specfun::{fill_ordered_uniforms, fill_uniform_simplex, open01};
use crate::{binomial_se, Error, MonteCarloParams, Result, RngStream};

// outer draws per parallel task; each task owns the child stream of its index
const CHUNK: usize = 64;

/// Monte Carlo estimate of `φ_α(ω)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CredibilityEstimate {
    pub omega: f64,
    pub alpha: f64,
    pub phi_hat: f64,
    pub std_err: f64,
    pub outer_draws: usize,
    /// PRS draws per noncoverage estimate; 0 when `Q_ω` is evaluated exactly.
    pub inner_draws: usize,
}

impl CredibilityEstimate {
    fn from_count(omega: f64, alpha: f64, hits: usize, outer: usize, inner: usize) -> Self {
        let phi_hat = hits as f64 / outer as f64;
        Self {
            omega,
            alpha,
            phi_hat,
            std_err: binomial_se(phi_hat, outer),
            outer_draws: outer,
            inner_draws: inner,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub iteration: usize,
    pub omega: f64,
    pub phi_hat: f64,
}

/// Outcome of [`solve_mb`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub alpha: f64,
    /// The calibrated family, `omega` set to `omega_star`.
    pub family: PrsFamily,
    pub omega_star: f64,
    pub trajectory: Vec<TrajectoryPoint>,
    pub converged: bool,
    /// Band `|φ̂ - α|` that the terminal re-check had to meet.
    pub tolerance: f64,
    /// Whether the averaged iterate sits on the clamp boundary of the index
    /// range, meaning no interior root was found.
    pub at_boundary: bool,
    pub final_phi: CredibilityEstimate,
}

impl CalibrationResult {
    /// `Ok(self)` when converged, otherwise [`Error::Calibration`].
    pub fn into_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::Calibration(Box::new(self)))
        }
    }
}

/// Robbins–Monro settings.
///
/// The iteration runs on a working coordinate `s` (`ω` itself, or `ln ω` for
/// the beta box) clamped to a box, with step
/// `s ← s + a_t (φ̂_t - α)`, `a_t = gain/(t + 1 + t0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaParams {
    pub max_iters: usize,
    /// Outer draws per iteration.
    pub batch: usize,
    /// Step constant; `None` means twice the width of the working range.
    pub gain: Option<f64>,
    pub t0: f64,
    /// Fraction of final iterates averaged into `omega_star`.
    pub tail_fraction: f64,
    /// Pool size for the first half of the run.
    pub inner_early: usize,
    /// Pool size for the second half and the warm start grid.
    pub inner_late: usize,
    pub tol: f64,
    pub recheck_outer: usize,
    pub recheck_inner: usize,
    /// Points of the common-random-numbers grid used for the starting value.
    pub warm_grid: usize,
    pub warm_outer: usize,
}

impl Default for SaParams {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            batch: 200,
            gain: None,
            t0: 20.0,
            tail_fraction: 0.25,
            inner_early: 1_000,
            inner_late: 10_000,
            tol: 0.01,
            recheck_outer: 100_000,
            recheck_inner: 10_000,
            warm_grid: 17,
            warm_outer: 10_000,
        }
    }
}

impl SaParams {
    /// Smaller budget for the pooled families, sized for a single core.
    pub fn desk() -> Self {
        Self {
            max_iters: 300,
            batch: 100,
            inner_late: 5_000,
            recheck_outer: 10_000,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if self.max_iters < 4 {
            bad.push("sa.max_iters must be >= 4".to_string());
        }
        if self.batch < 1 {
            bad.push("sa.batch must be >= 1".to_string());
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 1.0) {
            bad.push("sa.tail_fraction must lie in (0, 1]".to_string());
        }
        if matches!(self.gain, Some(g) if !(g > 0.0 && g.is_finite())) {
            bad.push("sa.gain must be positive".to_string());
        }
        if !(self.t0 >= 0.0) {
            bad.push("sa.t0 must be >= 0".to_string());
        }
        if !(self.tol > 0.0) {
            bad.push("sa.tol must be positive".to_string());
        }
        if self.warm_grid < 2 {
            bad.push("sa.warm_grid must be >= 2".to_string());
        }
        for (name, v, min) in [
            ("sa.inner_early", self.inner_early, MonteCarloParams::MIN_INNER),
            ("sa.inner_late", self.inner_late, MonteCarloParams::MIN_INNER),
            ("sa.recheck_inner", self.recheck_inner, MonteCarloParams::MIN_INNER),
            ("sa.recheck_outer", self.recheck_outer, MonteCarloParams::MIN_OUTER),
            ("sa.warm_outer", self.warm_outer, MonteCarloParams::MIN_OUTER),
        ] {
            if v < min {
                bad.push(format!("{name} = {v} is below the minimum of {min}"));
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(bad.join("; ")))
        }
    }
}

/// Working coordinate of the SA iteration.
#[derive(Debug, Clone, Copy)]
struct IndexScale {
    lo: f64,
    hi: f64,
    log: bool,
}

impl IndexScale {
    fn for_family(family: &PrsFamily) -> Result<Self> {
        match family.shape {
            PrsShape::Interval | PrsShape::Rectangle => Ok(Self { lo: 0.0, hi: 1.0, log: false }),
            PrsShape::KlBall => Ok(Self {
                lo: 0.0,
                hi: (family.dim as f64).ln() + 5.0,
                log: false,
            }),
            PrsShape::BetaBoxHier => Ok(Self {
                lo: 1e-3_f64.ln(),
                hi: 1e3_f64.ln(),
                log: true,
            }),
            PrsShape::Point | PrsShape::Vacuous => Err(Error::domain(format!(
                "the {} PRS has no index to calibrate",
                family.shape.name()
            ))),
        }
    }

    fn omega(&self, s: f64) -> f64 {
        if self.log {
            s.exp()
        } else {
            s
        }
    }

    fn width(&self) -> f64 {
        self.hi - self.lo
    }

    fn clamp(&self, s: f64) -> f64 {
        s.clamp(self.lo, self.hi)
    }

    fn grid(&self, k: usize) -> Vec<f64> {
        (0..k)
            .map(|i| self.lo + self.width() * i as f64 / (k - 1) as f64)
            .collect()
    }
}

/// Inner evaluator of `Q_ω(U*) ≥ 1-α`.
enum Engine {
    Constant(f64),
    Closed { dim: usize },
    Kl(KlPool),
    Box(BoxPool),
}

/// Per-ω precomputation shared by all targets of a batch.
struct AtOmega {
    omega: f64,
    alpha: f64,
    // max pooled sets allowed to cover a badly missed target
    k: usize,
    levels: Vec<f64>,
}

impl Engine {
    fn build(family: &PrsFamily, inner: usize, stream: RngStream) -> Self {
        match family.shape {
            PrsShape::Point => Engine::Constant(1.0),
            PrsShape::Vacuous => Engine::Constant(0.0),
            PrsShape::Interval | PrsShape::Rectangle => Engine::Closed { dim: family.dim },
            PrsShape::KlBall => Engine::Kl(KlPool::sample(family.dim, inner, &mut stream.rng())),
            PrsShape::BetaBoxHier => Engine::Box(BoxPool::sample(family.dim, inner, &mut stream.rng())),
        }
    }

    fn inner_draws(&self) -> usize {
        match self {
            Engine::Kl(p) => p.len(),
            Engine::Box(p) => p.len(),
            _ => 0,
        }
    }

    fn at(&self, omega: f64, alpha: f64) -> AtOmega {
        let m = self.inner_draws();
        let levels = match self {
            Engine::Box(p) => p.levels(omega),
            _ => Vec::new(),
        };
        AtOmega {
            omega,
            alpha,
            k: allowed_covers(alpha, m),
            levels,
        }
    }

    /// Draw `U* ~ μ` in the form the evaluator consumes: coordinates in the
    /// cube, `log P*` on the simplex, or `p`-values of order statistics.
    fn sample_target<R: Rng + ?Sized>(&self, rng: &mut R, buf: &mut Vec<f64>) {
        match self {
            Engine::Constant(_) => buf.clear(),
            Engine::Closed { dim } => {
                buf.clear();
                buf.extend((0..*dim).map(|_| open01(rng)));
            }
            Engine::Kl(pool) => {
                // R is unconstrained by the ball, so only P* matters
                fill_uniform_simplex(buf, pool.dim(), rng);
                for v in buf.iter_mut() {
                    *v = if *v > 0.0 { v.ln() } else { f64::NEG_INFINITY };
                }
            }
            Engine::Box(pool) => {
                fill_ordered_uniforms(buf, pool.dim(), rng);
                *buf = pool.target_pvalues(buf);
            }
        }
    }

    fn badly_missed(&self, at: &AtOmega, target: &[f64]) -> bool {
        match self {
            Engine::Constant(q) => *q >= 1.0 - at.alpha,
            Engine::Closed { .. } => {
                let cover: f64 = target
                    .iter()
                    .map(|&u| 1.0 - interval_noncoverage(u, at.omega))
                    .product();
                1.0 - cover >= 1.0 - at.alpha
            }
            Engine::Kl(pool) => {
                let mut c = 0;
                for j in 0..pool.len() {
                    if pool.divergence(j, target) <= at.omega {
                        c += 1;
                        if c > at.k {
                            return false;
                        }
                    }
                }
                true
            }
            Engine::Box(pool) => {
                let mut c = 0;
                for j in 0..pool.len() {
                    if pool.covers(j, target, at.levels[j]) {
                        c += 1;
                        if c > at.k {
                            return false;
                        }
                    }
                }
                true
            }
        }
    }

    /// Largest `ω` at which the target is still badly missed, for pooled
    /// engines: the `(k+1)`-th smallest pooled threshold.
    fn critical_index(&self, k: usize, target: &[f64], scratch: &mut Vec<f64>) -> f64 {
        match self {
            Engine::Kl(pool) => pool.thresholds(target, scratch),
            Engine::Box(pool) => pool.thresholds(target, scratch),
            _ => unreachable!("closed-form engines are evaluated per ω"),
        }
        let (_, kth, _) = scratch.select_nth_unstable_by(k, f64::total_cmp);
        *kth
    }

    fn pooled(&self) -> bool {
        matches!(self, Engine::Kl(_) | Engine::Box(_))
    }

    /// Number of badly missed targets among `outer` draws from `stream`.
    fn count(&self, at: &AtOmega, outer: usize, stream: RngStream) -> usize {
        let tasks = outer.div_ceil(CHUNK);
        (0..tasks)
            .into_par_iter()
            .map(|c| {
                let mut rng = stream.child(c as u64).rng();
                let len = CHUNK.min(outer - c * CHUNK);
                let mut buf = Vec::new();
                (0..len)
                    .filter(|_| {
                        self.sample_target(&mut rng, &mut buf);
                        self.badly_missed(at, &buf)
                    })
                    .count()
            })
            .sum()
    }

    /// Counts at every grid point from one shared outer sample.
    fn count_curve(&self, omegas: &[f64], alpha: f64, outer: usize, stream: RngStream) -> Vec<usize> {
        let k = allowed_covers(alpha, self.inner_draws());
        let ats: Vec<AtOmega> = if self.pooled() {
            Vec::new()
        } else {
            omegas.iter().map(|&w| self.at(w, alpha)).collect()
        };
        let tasks = outer.div_ceil(CHUNK);
        (0..tasks)
            .into_par_iter()
            .map(|c| {
                let mut rng = stream.child(c as u64).rng();
                let len = CHUNK.min(outer - c * CHUNK);
                let mut buf = Vec::new();
                let mut scratch = Vec::new();
                let mut hits = vec![0usize; omegas.len()];
                for _ in 0..len {
                    self.sample_target(&mut rng, &mut buf);
                    if self.pooled() {
                        let crit = self.critical_index(k, &buf, &mut scratch);
                        for (h, &w) in hits.iter_mut().zip(omegas) {
                            *h += usize::from(w < crit);
                        }
                    } else {
                        for (h, at) in hits.iter_mut().zip(&ats) {
                            *h += usize::from(self.badly_missed(at, &buf));
                        }
                    }
                }
                hits
            })
            .reduce(
                || vec![0; omegas.len()],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            )
    }
}

/// `Q̂ = misses/m ≥ 1-α` iff at most `⌊αm⌋` pooled sets cover the target.
fn allowed_covers(alpha: f64, m: usize) -> usize {
    ((alpha * m as f64) + 1e-9).floor() as usize
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

fn check_mc(family: &PrsFamily, mc: &MonteCarloParams) -> Result<()> {
    mc.check_outer()?;
    if matches!(family.shape, PrsShape::KlBall | PrsShape::BetaBoxHier) {
        mc.check_inner()?;
    }
    Ok(())
}

/// Estimate `φ_α(ω)` at the family's own index.
///
/// Interval and rectangle families use the exact noncoverage; the KL ball
/// and the beta box estimate it from a pool of `mc.inner` PRS draws. For the
/// beta box the pool samples the level `Z` jointly with the center, so the
/// estimate is of the mixture noncoverage `Q̄_ω`.
pub fn phi_alpha(
    family: &PrsFamily,
    alpha: f64,
    mc: &MonteCarloParams,
    stream: RngStream,
) -> Result<CredibilityEstimate> {
    check_alpha(alpha)?;
    family.validate()?;
    check_mc(family, mc)?;
    let engine = Engine::build(family, mc.inner, stream.named("pool"));
    let hits = engine.count(&engine.at(family.omega, alpha), mc.outer, stream.named("outer"));
    Ok(CredibilityEstimate::from_count(
        family.omega,
        alpha,
        hits,
        mc.outer,
        engine.inner_draws(),
    ))
}

/// `φ̂_α` over a grid of indices from one outer sample and one pool, so the
/// curve is exactly nonincreasing along an ascending grid.
pub fn credibility_curve(
    family: &PrsFamily,
    omegas: &[f64],
    alpha: f64,
    mc: &MonteCarloParams,
    stream: RngStream,
) -> Result<Vec<CredibilityEstimate>> {
    check_alpha(alpha)?;
    if omegas.is_empty() {
        return Err(Error::domain("credibility curve needs a nonempty grid"));
    }
    for &w in omegas {
        family.with_omega(w).validate()?;
    }
    check_mc(family, mc)?;
    let engine = Engine::build(family, mc.inner, stream.named("pool"));
    let hits = engine.count_curve(omegas, alpha, mc.outer, stream.named("outer"));
    Ok(omegas
        .iter()
        .zip(hits)
        .map(|(&w, h)| CredibilityEstimate::from_count(w, alpha, h, mc.outer, engine.inner_draws()))
        .collect())
}

/// Solve `φ_α(ω) = α` for the maximal-belief index `ω(α)`.
///
/// The run starts from the first crossing of a coarse credibility curve,
/// iterates Robbins–Monro with a pool of `sa.inner_early` draws for the first
/// half and `sa.inner_late` for the second, averages the last
/// `sa.tail_fraction` of iterates, and re-estimates `φ` at the average with
/// fresh draws. `converged` is false when the re-check misses `α` by more
/// than `sa.tol` or the average lies on the boundary of the index range.
pub fn solve_mb(family: &PrsFamily, alpha: f64, sa: &SaParams, stream: RngStream) -> Result<CalibrationResult> {
    check_alpha(alpha)?;
    sa.validate()?;
    let scale = IndexScale::for_family(family)?;
    family.with_omega(scale.omega(scale.lo)).validate()?;

    let gain = sa.gain.unwrap_or(2.0 * scale.width());
    let switch = sa.max_iters / 2;
    let mut engine = Engine::build(family, sa.inner_early, stream.named("pool-early"));

    let grid = scale.grid(sa.warm_grid);
    let omegas: Vec<f64> = grid.iter().map(|&s| scale.omega(s)).collect();
    let warm = engine.count_curve(&omegas, alpha, sa.warm_outer, stream.named("warm"));
    let warm: Vec<f64> = warm.iter().map(|&h| h as f64 / sa.warm_outer as f64).collect();
    let mut s = start_from_curve(&grid, &warm, alpha);

    let sa_stream = stream.named("sa");
    let tail_from = sa.max_iters - ((sa.max_iters as f64 * sa.tail_fraction).ceil() as usize).max(1);
    let mut tail_sum = 0.0;
    let mut trajectory = Vec::with_capacity(sa.max_iters);
    for t in 0..sa.max_iters {
        if t == switch && engine.pooled() {
            engine = Engine::build(family, sa.inner_late, stream.named("pool-late"));
        }
        let omega = scale.omega(s);
        let hits = engine.count(&engine.at(omega, alpha), sa.batch, sa_stream.child(t as u64));
        let phi_hat = hits as f64 / sa.batch as f64;
        trajectory.push(TrajectoryPoint { iteration: t, omega, phi_hat });
        if t >= tail_from {
            tail_sum += s;
        }
        let a_t = gain / (t as f64 + 1.0 + sa.t0);
        s = scale.clamp(s + a_t * (phi_hat - alpha));
    }
    let s_star = tail_sum / (sa.max_iters - tail_from) as f64;
    let omega_star = scale.omega(s_star);
    let edge = 1e-3 * scale.width();
    let at_boundary = s_star <= scale.lo + edge || s_star >= scale.hi - edge;

    let recheck = MonteCarloParams::new(sa.recheck_outer, sa.recheck_inner);
    let calibrated = family.with_omega(omega_star);
    let final_phi = phi_alpha(&calibrated, alpha, &recheck, stream.named("recheck"))?;
    let converged = !at_boundary && (final_phi.phi_hat - alpha).abs() <= sa.tol;
    Ok(CalibrationResult {
        alpha,
        family: calibrated,
        omega_star,
        trajectory,
        converged,
        tolerance: sa.tol,
        at_boundary,
        final_phi,
    })
}

/// First crossing of `α` on an ascending grid, interpolated linearly.
fn start_from_curve(grid: &[f64], phi: &[f64], alpha: f64) -> f64 {
    match phi.iter().position(|&p| p <= alpha) {
        None => grid[grid.len() - 1],
        Some(0) => grid[0],
        Some(k) => {
            let (p0, p1) = (phi[k - 1], phi[k]);
            let frac = if p0 > p1 { (p0 - alpha) / (p0 - p1) } else { 0.5 };
            grid[k - 1] + frac * (grid[k] - grid[k - 1])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // φ for the interval family by quadrature of the closed-form Q, split at
    // the kinks of Q so each piece is smooth.
    fn interval_phi_quadrature(omega: f64, alpha: f64) -> f64 {
        let mut cuts = vec![0.0, 1.0, omega, 1.0 - omega];
        cuts.retain(|c| (0.0..=1.0).contains(c));
        cuts.sort_by(f64::total_cmp);
        let ind = |u: f64| f64::from(u8::from(interval_noncoverage(u, omega) >= 1.0 - alpha));
        // the indicator has at most one jump per smooth piece; locate it by
        // bisection and add the measure of the side where it holds
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b - a < 1e-15 {
                continue;
            }
            let (ia, ib) = (ind(a + 1e-13), ind(b - 1e-13));
            if ia == ib {
                total += ia * (b - a);
                continue;
            }
            let (mut lo, mut hi) = (a, b);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if ind(mid) == ia {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            total += ia * (lo - a) + ib * (b - lo);
        }
        total
    }

    fn oracle_root(alpha: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if interval_phi_quadrature(mid, alpha) > alpha {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn quadrature_oracle_shape() {
        for alpha in [0.05, 0.1] {
            assert_eq!(interval_phi_quadrature(0.0, alpha), 1.0);
            assert!(interval_phi_quadrature(1.0, alpha) < 1e-12);
            let r = oracle_root(alpha);
            assert!((r - 0.5).abs() < 1e-6, "{r}");
        }
    }

    #[test]
    fn interval_endpoints() {
        let mc = MonteCarloParams::new(1000, 100);
        let s = RngStream::new(1, 0);
        for alpha in [0.01, 0.05, 0.5] {
            assert_eq!(phi_alpha(&PrsFamily::interval(1.0), alpha, &mc, s).unwrap().phi_hat, 0.0);
            assert_eq!(phi_alpha(&PrsFamily::interval(0.0), alpha, &mc, s).unwrap().phi_hat, 1.0);
        }
        let curve = credibility_curve(&PrsFamily::interval(0.5), &[0.0, 1.0], 0.1, &mc, s).unwrap();
        assert_eq!((curve[0].phi_hat, curve[1].phi_hat), (1.0, 0.0));
    }

    #[test]
    fn interval_curve_matches_quadrature() {
        let mc = MonteCarloParams::new(100_000, 100);
        let grid = [0.2, 0.5, 0.8];
        let curve = credibility_curve(&PrsFamily::interval(0.5), &grid, 0.1, &mc, RngStream::new(3, 0)).unwrap();
        for est in curve {
            let exact = interval_phi_quadrature(est.omega, 0.1);
            assert!((est.phi_hat - exact).abs() <= 3.0 * est.std_err.max(1e-3), "{est:?} vs {exact}");
        }
    }

    #[test]
    fn curves_are_monotone() {
        let grid: Vec<f64> = (0..=20).map(|i| f64::from(i) * 0.4).collect();
        let mc = MonteCarloParams::new(500, 500);
        for family in [PrsFamily::kl_ball(4, 0.0), PrsFamily::beta_box_hier(5, 1.0)] {
            let c = credibility_curve(&family, &grid, 0.05, &mc, RngStream::new(9, 1)).unwrap();
            assert!(c.windows(2).all(|w| w[1].phi_hat <= w[0].phi_hat), "{family:?}");
            assert!(c[0].phi_hat > c[c.len() - 1].phi_hat);
        }
    }

    #[test]
    fn pooled_curve_agrees_with_direct_count() {
        let mc = MonteCarloParams::new(300, 400);
        let s = RngStream::new(11, 2);
        for family in [PrsFamily::kl_ball(3, 1.0), PrsFamily::beta_box_hier(4, 0.7)] {
            let direct = phi_alpha(&family, 0.1, &mc, s).unwrap();
            let curve = credibility_curve(&family, &[family.omega], 0.1, &mc, s).unwrap();
            assert_eq!(direct.phi_hat, curve[0].phi_hat, "{family:?}");
        }
    }

    #[test]
    fn solver_finds_interval_root() {
        let sa = SaParams {
            recheck_outer: 20_000,
            ..SaParams::default()
        };
        for alpha in [0.05, 0.1] {
            let res = solve_mb(&PrsFamily::interval(0.5), alpha, &sa, RngStream::new(5, 0)).unwrap();
            assert!(res.converged, "{:?}", res.final_phi);
            assert!((res.omega_star - oracle_root(alpha)).abs() <= 0.02, "{}", res.omega_star);
            assert!((interval_phi_quadrature(res.omega_star, alpha) - alpha).abs() <= 0.01);
            assert_eq!(res.trajectory.len(), sa.max_iters);
        }
    }

    #[test]
    fn solver_is_reproducible() {
        let sa = SaParams {
            max_iters: 50,
            recheck_outer: 1000,
            ..SaParams::default()
        };
        let a = solve_mb(&PrsFamily::interval(0.5), 0.05, &sa, RngStream::new(8, 0)).unwrap();
        let b = solve_mb(&PrsFamily::interval(0.5), 0.05, &sa, RngStream::new(8, 0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn kl_ball_small_self_consistency() {
        let res = solve_mb(&PrsFamily::kl_ball(3, 0.0), 0.05, &SaParams::desk(), RngStream::new(21, 0)).unwrap();
        assert!(res.converged, "{res:?}");
        assert!((res.final_phi.phi_hat - 0.05).abs() <= 0.01);
    }

    #[test]
    fn rejects_bad_input() {
        let mc = MonteCarloParams::new(1000, 10);
        let s = RngStream::new(0, 0);
        assert!(matches!(phi_alpha(&PrsFamily::kl_ball(3, 1.0), 0.05, &mc, s), Err(Error::Config(_))));
        assert!(phi_alpha(&PrsFamily::interval(0.5), 0.0, &mc, s).is_err());
        assert!(credibility_curve(&PrsFamily::interval(0.5), &[], 0.05, &mc, s).is_err());
        assert!(solve_mb(&PrsFamily::point(1), 0.05, &SaParams::default(), s).is_err());
        let bad = SaParams { batch: 0, recheck_inner: 5, ..SaParams::default() };
        let Err(Error::Config(msg)) = solve_mb(&PrsFamily::interval(0.5), 0.05, &bad, s) else {
            panic!("expected a configuration error");
        };
        assert!(msg.contains("sa.batch") && msg.contains("sa.recheck_inner"));
    }
}
