//! Testing equality of exponential rates: maximal-belief plausibility
//! against the likelihood-ratio test.
//!
//! Run with `cargo run --example homogeneity`.

use weakbelief::baselines::lr_test;
use weakbelief::calibrate::{solve_mb, SaParams};
use weakbelief::models::{generate_data, homogeneity_test, ModelParams, ObservedData};
use weakbelief::prs::PrsFamily;
use weakbelief::{MonteCarloParams, RngStream};

fn main() -> weakbelief::Result<()> {
    let root = RngStream::new(11, 0);
    let (n1, n2, alpha) = (10, 10, 0.05);
    let n = n1 + n2;
    let calib = solve_mb(&PrsFamily::kl_ball(n, 0.0), alpha, &SaParams::desk(), root.named("calibrate"))?;
    println!("omega({alpha}) for n = {n}: {:.4}", calib.omega_star);

    let mc = MonteCarloParams::new(1000, 10_000);
    for ratio in [1.0, 2.0, 4.0] {
        let mut rates = vec![1.0; n1];
        rates.extend(vec![ratio; n2]);
        let data = generate_data(&ModelParams::Homogeneity { rates }, n, &mut root.named("data").child(ratio.to_bits()).rng())?;
        let ObservedData::Homogeneity { times } = data else { unreachable!() };
        let mb = homogeneity_test(&times, alpha, &calib, &mc, &mut root.named("mb").rng())?;
        let lr = lr_test(&times, alpha, 10_000, root.named("lr-null"))?;
        println!(
            "rate ratio {ratio}: MB pl = {:.3} reject={:<5}  LR = {:.3} (crit {:.3}) reject={}",
            mb.evidence.plausibility, mb.reject, lr.statistic, lr.critical_value, lr.reject
        );
    }
    Ok(())
}
