//! Posterior belief and plausibility for the normal mean and a Bernoulli
//! proportion, including the effect of weakening.
//!
//! Run with `cargo run --example belief_functions`.

use weakbelief::models::{bernoulli_belief, normal_belief, posterior, Assertion, ObservedData};
use weakbelief::{MonteCarloParams, RngStream};

fn main() -> weakbelief::Result<()> {
    let x = 1.2;
    println!("normal mean, X = {x}");
    println!("{:>6} {:>22} {:>22} {:>22}", "theta", "omega=0", "omega=0.25", "omega=0.5");
    for theta in [-0.5, 0.5, 1.2, 2.0, 3.0] {
        let cells: Vec<String> = [0.0, 0.25, 0.5]
            .iter()
            .map(|&w| {
                let p = normal_belief(x, theta, w).unwrap();
                format!("({:.4}, {:.4})", p.belief, p.plausibility)
            })
            .collect();
        println!("{theta:>6} {:>22} {:>22} {:>22}", cells[0], cells[1], cells[2]);
    }

    let (n, k) = (12, 7);
    let p = bernoulli_belief(n, k, 0.5, 0.0)?;
    println!("\nBernoulli n={n}, N={k}: bel(theta<=0.5) = {:.6} (794/4096 = {:.6}), pl = {:.6}", p.belief, 794.0 / 4096.0, p.plausibility);

    // generic entry point: assertions and their complements
    let mc = MonteCarloParams::default();
    let mut rng = RngStream::new(3, 0).rng();
    let data = ObservedData::Normal { x };
    let a = Assertion::le_theta(0.0).complement();
    let pair = posterior(&data, &a, 0.25, &mc, &mut rng)?;
    println!("bel(theta > 0 | X=1.2, omega=0.25) = {:.4}, pl = {:.4}", pair.belief, pair.plausibility);
    let single = posterior(&data, &Assertion::singleton(1.0), 0.25, &mc, &mut rng)?;
    println!("pl(theta = 1.0) = {:.4}", single.plausibility);
    Ok(())
}
