//! The credibility function phi_alpha(omega) of a PRS family, and its root.
//!
//! Run with `cargo run --example credibility`.

use weakbelief::calibrate::{credibility_curve, solve_mb, SaParams};
use weakbelief::prs::PrsFamily;
use weakbelief::{MonteCarloParams, RngStream};

fn main() -> weakbelief::Result<()> {
    let root = RngStream::new(2024, 0);
    let alpha = 0.05;
    let omegas: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let mc = MonteCarloParams::new(50_000, 1000);
    let curve = credibility_curve(&PrsFamily::interval(0.0), &omegas, alpha, &mc, root.named("curve"))?;
    println!("interval family, alpha = {alpha}");
    for e in &curve {
        println!("  omega {:.1}: phi = {:.4} ± {:.4}", e.omega, e.phi_hat, e.std_err);
    }

    let res = solve_mb(&PrsFamily::interval(0.0), alpha, &SaParams::default(), root.named("solve"))?;
    println!(
        "omega* = {:.4}, re-checked phi = {:.4} ± {:.4}, converged = {}",
        res.omega_star, res.final_phi.phi_hat, res.final_phi.std_err, res.converged
    );

    // the KL ball needs Monte Carlo noncoverage; the desk preset keeps it quick
    let kl = solve_mb(&PrsFamily::kl_ball(5, 0.0), alpha, &SaParams::desk(), root.named("kl"))?;
    println!("KL ball n=5: omega* = {:.4}, phi = {:.4}", kl.omega_star, kl.final_phi.phi_hat);
    Ok(())
}
