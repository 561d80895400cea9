use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::calibrate::CredibilityEstimate;
use crate::prs::{draw, PrsFamily};
use crate::specfun::sample_ordered_uniforms;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

// max |F_n - F| for a sample against a continuous CDF
fn ks_distance(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

const KS_1PCT: f64 = 1.6276;

fn calibration(shape: PrsShape, n: usize, omega: f64, alpha: f64, converged: bool) -> CalibrationResult {
    let family = PrsFamily { shape, dim: n, omega };
    CalibrationResult {
        alpha,
        family,
        omega_star: omega,
        trajectory: Vec::new(),
        converged,
        tolerance: 0.01,
        at_boundary: false,
        final_phi: CredibilityEstimate {
            omega,
            alpha,
            phi_hat: alpha,
            std_err: 0.0,
            outer_draws: 0,
            inner_draws: 0,
        },
    }
}

#[test]
fn normal_closed_form_examples() {
    let p = normal_belief(1.2, 1.2, 0.5).unwrap();
    assert_eq!((p.belief, p.plausibility), (0.0, 1.0));
    let p = normal_belief(1.2, 2.2, 0.0).unwrap();
    assert!(close(p.belief, 0.841_344_746_068_542_9, 1e-15));
    assert_eq!(p.belief, p.plausibility);
    assert_eq!(normal_belief(0.3, -2.0, 1.0).unwrap(), BeliefPair::exact(0.0, 1.0));
    for theta in [-1.0, 0.5, 1.9, 3.0] {
        let a = normal_belief(1.2, theta, 0.25).unwrap();
        let b = normal_belief(1.2, theta, 0.5).unwrap();
        assert!(b.plausibility - b.belief >= a.plausibility - a.belief);
    }
    assert!(normal_belief(0.0, 0.0, 1.5).is_err());
}

#[test]
fn normal_mc_matches_closed_form() {
    let mc = MonteCarloParams::new(100, 100_000);
    let mut r = rng(1);
    for &omega in &[0.0, 0.1, 0.25, 0.5, 0.8] {
        for &theta in &[-1.0, 0.4, 1.2, 2.0, 3.5] {
            let exact = normal_belief(1.2, theta, omega).unwrap();
            let est = normal_belief_mc(1.2, theta, omega, &mc, &mut r).unwrap();
            assert!(close(est.belief, exact.belief, 3.0 * est.belief_se + 1e-12), "{omega} {theta}");
            assert!(close(est.plausibility, exact.plausibility, 3.0 * est.plausibility_se + 1e-12));
            if omega == 0.0 {
                assert_eq!(est.belief, est.plausibility);
            }
        }
    }
    let vac = normal_belief_mc(1.2, 0.0, 1.0, &mc, &mut r).unwrap();
    assert_eq!((vac.belief, vac.plausibility), (0.0, 1.0));
}

#[test]
fn bernoulli_binomial_tails() {
    let p = bernoulli_belief(12, 7, 0.5, 0.0).unwrap();
    assert!(close(p.belief, 794.0 / 4096.0, 1e-12));
    assert!(close(p.plausibility, 1586.0 / 4096.0, 1e-12));
    assert!(close(p.plausibility, 0.387_207_031_25, 1e-12));
    let w = bernoulli_belief(12, 7, 0.5, 0.1).unwrap();
    assert!(w.belief < p.belief && w.plausibility > p.plausibility);
    assert!(bernoulli_belief(3, 4, 0.5, 0.0).is_err());
}

#[test]
fn bernoulli_endpoint_conventions() {
    // N = 0: lower endpoint is 0, so every θ is plausible
    assert_eq!(bernoulli_belief(5, 0, 0.2, 0.3).unwrap().plausibility, 1.0);
    // N = n: upper endpoint is 1, so only θ = 1 is believed
    for omega in [0.0, 0.3] {
        assert_eq!(bernoulli_belief(5, 5, 0.6, omega).unwrap().belief, 0.0);
        assert_eq!(bernoulli_belief(5, 5, 1.0, omega).unwrap().belief, 1.0);
    }
    assert_eq!(bernoulli_belief(5, 2, 0.9, 1.0).unwrap(), BeliefPair::exact(0.0, 1.0));
}

#[test]
fn bernoulli_matches_order_statistic_simulation() {
    let (n, k) = (12usize, 7usize);
    let draws = 100_000;
    let mut r = rng(2);
    for &omega in &[0.0, 0.1, 0.3] {
        for &theta in &[0.2, 0.5, 0.7, 0.95] {
            let (mut inside, mut touch) = (0usize, 0usize);
            for _ in 0..draws {
                let u = sample_ordered_uniforms(n, &mut r).unwrap();
                let lower = u.at(k) * (1.0 - omega);
                let upper = u.at(k + 1) + omega * (1.0 - u.at(k + 1));
                inside += usize::from(upper <= theta);
                touch += usize::from(lower <= theta);
            }
            let exact = bernoulli_belief(n, k, theta, omega).unwrap();
            let (b, p) = (inside as f64 / draws as f64, touch as f64 / draws as f64);
            assert!(close(b, exact.belief, 3.0 * binomial_se(exact.belief, draws) + 1e-12));
            assert!(close(p, exact.plausibility, 3.0 * binomial_se(exact.plausibility, draws) + 1e-12));
        }
    }
}

#[test]
fn im_inequality_order_and_monotonicity() {
    let thetas: Vec<f64> = (0..=40).map(|i| f64::from(i) / 40.0).collect();
    for &omega in &[0.05, 0.2, 0.5, 0.9] {
        let mut last = (0.0, 0.0);
        for &t in &thetas {
            let x = -1.0 + 4.0 * t;
            let base = normal_belief(1.2, x, 0.0).unwrap();
            let weak = normal_belief(1.2, x, omega).unwrap();
            assert!(weak.belief <= base.belief && weak.plausibility >= base.plausibility);
            assert!(weak.belief <= weak.plausibility);
            assert!(weak.belief >= last.0 && weak.plausibility >= last.1);
            last = (weak.belief, weak.plausibility);
        }
        for (n, k) in [(12, 0), (12, 7), (12, 12), (30, 3)] {
            let mut last = (0.0, 0.0);
            for &t in &thetas {
                let base = bernoulli_belief(n, k, t, 0.0).unwrap();
                let weak = bernoulli_belief(n, k, t, omega).unwrap();
                assert!(weak.belief <= base.belief + 1e-15 && weak.plausibility + 1e-15 >= base.plausibility);
                assert!(weak.belief <= weak.plausibility);
                assert!(weak.belief >= last.0 && weak.plausibility >= last.1);
                last = (weak.belief, weak.plausibility);
            }
        }
    }
}

#[test]
fn frequency_calibration_of_normal_belief() {
    // ω = 0.5 is the credible interval index at every α; A = {Θ > 0}, Θ = 0
    let a = Assertion::le_theta(0.0).complement();
    let mut r = rng(3);
    let reps = 2000;
    let mc = MonteCarloParams::default();
    let mut hits = 0;
    for _ in 0..reps {
        let data = generate_data(&ModelParams::Normal { theta: 0.0 }, 1, &mut r).unwrap();
        let p = posterior(&data, &a, 0.5, &mc, &mut r).unwrap();
        hits += usize::from(p.belief >= 0.95);
    }
    let freq = hits as f64 / reps as f64;
    assert!(freq <= 0.05 + 3.0 * binomial_se(0.05, reps), "{freq}");
}

#[test]
fn assertions_and_complements() {
    let a = Assertion::le_theta(1.0);
    assert!(a.holds(&Parameter::Scalar(0.5)).unwrap());
    assert!(!a.complement().holds(&Parameter::Scalar(0.5)).unwrap());
    assert!(Assertion::homogeneity().holds(&Parameter::Rates(vec![2.0, 2.0])).unwrap());
    assert!(a.holds(&Parameter::Rates(vec![1.0])).is_err());
    let data = ObservedData::Normal { x: 0.4 };
    let mc = MonteCarloParams::default();
    let p = posterior(&data, &a, 0.3, &mc, &mut rng(0)).unwrap();
    let q = posterior(&data, &a.complement(), 0.3, &mc, &mut rng(0)).unwrap();
    assert!(close(p.belief, 1.0 - q.plausibility, 1e-15));
    assert!(close(p.plausibility, 1.0 - q.belief, 1e-15));
}

#[test]
fn singleton_plausibility_is_the_spread() {
    let mc = MonteCarloParams::default();
    let data = ObservedData::Bernoulli { n: 12, successes: 7 };
    for &(t, w) in &[(0.3, 0.0), (0.5, 0.1), (0.8, 0.4)] {
        let le = bernoulli_belief(12, 7, t, w).unwrap();
        let s = posterior(&data, &Assertion::singleton(t), w, &mc, &mut rng(0)).unwrap();
        assert!(close(s.plausibility, le.plausibility - le.belief, 1e-15));
    }
    let data = ObservedData::Normal { x: 1.0 };
    let s = posterior(&data, &Assertion::singleton(1.0), 0.5, &mc, &mut rng(0)).unwrap();
    assert_eq!(s.plausibility, 1.0);
    let le = normal_belief(1.0, 1.7, 0.3).unwrap();
    let s = posterior(&data, &Assertion::singleton(1.7), 0.3, &mc, &mut rng(0)).unwrap();
    assert!(close(s.plausibility, le.plausibility - le.belief, 1e-12));
}

#[test]
fn homogeneity_endpoints_and_errors() {
    let mc = MonteCarloParams::new(100, 1000);
    let x = [1.0, 2.0, 0.5];
    assert_eq!(homogeneity_plausibility(&x, 0.0, &mc, &mut rng(0)).unwrap().plausibility, 0.0);
    assert_eq!(homogeneity_plausibility(&x, f64::INFINITY, &mc, &mut rng(0)).unwrap().plausibility, 1.0);
    assert!(homogeneity_plausibility(&[1.0, 0.0], 1.0, &mc, &mut rng(0)).is_err());
    assert!(homogeneity_plausibility(&[1.0, -2.0], 1.0, &mc, &mut rng(0)).is_err());
    assert!(homogeneity_plausibility(&[1.0], 1.0, &mc, &mut rng(0)).is_err());
}

#[test]
fn homogeneity_two_point_quadrature() {
    // K((p, 1-p), (½, ½)) = p ln 2p + (1-p) ln 2(1-p) is symmetric about ½ and
    // increasing on [½, 1), so {K ≤ ω} = [½ - d, ½ + d] with P_1 ~ Unif(0,1)
    let omega = 0.01;
    let k = |p: f64| p * (2.0 * p).ln() + (1.0 - p) * (2.0 * (1.0 - p)).ln();
    let (mut lo, mut hi) = (0.5, 1.0 - 1e-15);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if k(mid) <= omega {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let exact = 2.0 * (lo - 0.5);
    let mc = MonteCarloParams::new(100, 100_000);
    let est = homogeneity_plausibility(&[1.0, 1.0], omega, &mc, &mut rng(4)).unwrap();
    assert_eq!(est.belief, 0.0);
    assert!(close(est.plausibility, exact, 3.0 * est.plausibility_se), "{} vs {exact}", est.plausibility);
}

#[test]
fn homogeneity_test_guards() {
    let mc = MonteCarloParams::new(100, 500);
    let x = [0.1, 5.0, 0.2, 9.0];
    let vac = calibration(PrsShape::KlBall, 4, f64::INFINITY, 0.05, true);
    let d = homogeneity_test(&x, 0.05, &vac, &mc, &mut rng(0)).unwrap();
    assert!(!d.reject);
    let wrong_n = calibration(PrsShape::KlBall, 5, 1.0, 0.05, true);
    assert!(matches!(homogeneity_test(&x, 0.05, &wrong_n, &mc, &mut rng(0)), Err(Error::Config(_))));
    let wrong_alpha = calibration(PrsShape::KlBall, 4, 1.0, 0.1, true);
    assert!(matches!(homogeneity_test(&x, 0.05, &wrong_alpha, &mc, &mut rng(0)), Err(Error::Config(_))));
    let failed = calibration(PrsShape::KlBall, 4, 1.0, 0.05, false);
    assert!(matches!(homogeneity_test(&x, 0.05, &failed, &mc, &mut rng(0)), Err(Error::Calibration(_))));
    let wrong_kind = calibration(PrsShape::BetaBoxHier, 4, 1.0, 0.05, true);
    assert!(homogeneity_test(&x, 0.05, &wrong_kind, &mc, &mut rng(0)).is_err());
}

#[test]
fn onesample_perfect_sample_and_vacuous() {
    let n = 20;
    let values: Vec<f64> = (1..=n).map(|i| (i as f64 - 0.5) / n as f64).collect();
    let mc = MonteCarloParams::new(100, 2000);
    let p = onesample_plausibility(&values, &Cdf::UNIFORM, 50.0, &mc, &mut rng(5)).unwrap();
    assert!(p.plausibility >= 0.95, "{p:?}");
    let v = onesample_plausibility(&values, &Cdf::UNIFORM, f64::INFINITY, &mc, &mut rng(5)).unwrap();
    assert_eq!(v.plausibility, 1.0);
    let calib = calibration(PrsShape::BetaBoxHier, n, f64::INFINITY, 0.05, true);
    let shifted: Vec<f64> = values.iter().map(|v| v * 0.2).collect();
    assert!(!onesample_test(&shifted, &Cdf::UNIFORM, 0.05, &calib, &mc, &mut rng(5)).unwrap().reject);
    assert!(onesample_plausibility(&[f64::NAN], &Cdf::UNIFORM, 1.0, &mc, &mut rng(5)).is_err());
}

#[test]
fn onesample_matches_direct_quantile_boxes() {
    // independent implementation: draw the PRS, map the box to u-space with
    // qBeta and test the transformed sample coordinatewise
    let n = 10;
    let mut r = rng(6);
    let values: Vec<f64> = (0..n).map(|_| open01(&mut r).powf(1.3)).collect();
    let mut t = values.clone();
    t.sort_by(f64::total_cmp);
    for &omega in &[0.3, 1.0, 4.0] {
        let family = PrsFamily::beta_box_hier(n, omega);
        let draws = 20_000;
        let mut hits = 0;
        for _ in 0..draws {
            let d = draw(&family, &mut r).unwrap();
            let b = d.beta_box_u_bounds().unwrap();
            hits += usize::from(t.iter().zip(&b).all(|(&x, &(lo, hi))| lo <= x && x <= hi));
        }
        let brute = hits as f64 / draws as f64;
        let mc = MonteCarloParams::new(100, draws);
        let est = onesample_plausibility(&values, &Cdf::UNIFORM, omega, &mc, &mut r).unwrap();
        let se = (binomial_se(brute, draws).powi(2) + est.plausibility_se.powi(2)).sqrt();
        assert!(close(est.plausibility, brute, 3.0 * se.max(1e-4)), "ω={omega}: {} vs {brute}", est.plausibility);
    }
}

#[test]
fn beta_boxes_are_never_empty() {
    let mut r = rng(7);
    for &omega in &[1e-3, 0.5, 2.0, 100.0] {
        assert_eq!(conflict_mass(15, omega, &[false; 14], 2000, &mut r).unwrap(), 0.0);
    }
    let mc = MonteCarloParams { conflict_probe: 200, ..MonteCarloParams::new(100, 500) };
    let p = onesample_plausibility(&[0.1, 0.5, 0.9], &Cdf::UNIFORM, 1.0, &mc, &mut r).unwrap();
    assert_eq!(p.conflict_mass, 0.0);
    assert!(!admits_nondecreasing(&[(0.5, 0.6), (0.1, 0.4)], &[false]));
    assert!(!admits_nondecreasing(&[(0.1, 0.2), (0.3, 0.4)], &[true]));
    assert!(admits_nondecreasing(&[(0.1, 0.35), (0.3, 0.4)], &[true]));
}

#[test]
fn generated_data_follow_their_laws() {
    let mut r = rng(8);
    let n = 10_000;
    let rates = vec![1.0; n];
    let ObservedData::Homogeneity { times } = generate_data(&ModelParams::Homogeneity { rates }, n, &mut r).unwrap() else {
        unreachable!()
    };
    let mean = times.iter().sum::<f64>() / n as f64;
    assert!(close(mean, 1.0, 3.0 / (n as f64).sqrt()), "{mean}");

    for _ in 0..20 {
        let d = generate_data(&ModelParams::Bernoulli { theta: 0.0 }, 30, &mut r).unwrap();
        assert_eq!(d, ObservedData::Bernoulli { n: 30, successes: 0 });
    }

    for f in [Cdf::UNIFORM, Cdf::Beta { a: 0.8, b: 0.8 }, Cdf::Normal { mean: 2.0, sd: 0.5 }] {
        let ObservedData::OneSample { values } = generate_data(&ModelParams::OneSample { dist: f }, n, &mut r).unwrap() else {
            unreachable!()
        };
        let d = ks_distance(values, |x| f.cdf(x).unwrap());
        assert!(d * (n as f64).sqrt() < KS_1PCT, "{f}: {d}");
    }
    assert!(generate_data(&ModelParams::Bernoulli { theta: 1.5 }, 3, &mut r).is_err());
    assert!(generate_data(&ModelParams::Homogeneity { rates: vec![1.0, 2.0] }, 3, &mut r).is_err());
}

#[test]
fn pivotal_route_matches_direct_exponentials() {
    // Θ_i X_i = R P_i reproduces independent Exp(Θ_i) margins
    let rates = vec![1.0, 2.0, 0.5];
    let reps = 10_000;
    let mut r = rng(9);
    let mut margins = vec![Vec::with_capacity(reps); rates.len()];
    for _ in 0..reps {
        let ObservedData::Homogeneity { times } =
            generate_data(&ModelParams::Homogeneity { rates: rates.clone() }, 3, &mut r).unwrap()
        else {
            unreachable!()
        };
        for (m, t) in margins.iter_mut().zip(times) {
            m.push(t);
        }
    }
    for (m, &rate) in margins.into_iter().zip(&rates) {
        let d = ks_distance(m, |x| 1.0 - (-rate * x).exp());
        assert!(d * (reps as f64).sqrt() < KS_1PCT, "rate {rate}: {d}");
    }
}
