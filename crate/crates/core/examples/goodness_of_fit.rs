//! One-sample goodness of fit: the hierarchical beta-box plausibility test
//! next to Kolmogorov-Smirnov, Anderson-Darling and Cramér-von Mises.
//!
//! Run with `cargo run --example goodness_of_fit`.

use weakbelief::baselines::{gof_test, Statistic};
use weakbelief::calibrate::{solve_mb, SaParams};
use weakbelief::models::{generate_data, onesample_test, Cdf, ModelParams, ObservedData};
use weakbelief::prs::PrsFamily;
use weakbelief::{MonteCarloParams, RngStream};

fn main() -> weakbelief::Result<()> {
    let root = RngStream::new(5, 0);
    let (n, alpha) = (30, 0.05);
    let f0 = Cdf::UNIFORM;
    let calib = solve_mb(&PrsFamily::beta_box_hier(n, 0.0), alpha, &SaParams::desk(), root.named("calibrate"))?;
    println!("omega({alpha}) for n = {n}: {:.4}\n", calib.omega_star);

    let mc = MonteCarloParams::new(1000, 10_000);
    for truth in [Cdf::UNIFORM, Cdf::Beta { a: 0.6, b: 0.6 }, Cdf::Beta { a: 2.0, b: 2.0 }] {
        let data = generate_data(&ModelParams::OneSample { dist: truth }, n, &mut root.named(&truth.to_string()).rng())?;
        let ObservedData::OneSample { values } = data else { unreachable!() };
        let mb = onesample_test(&values, &f0, alpha, &calib, &mc, &mut root.named("mb").rng())?;
        print!("data ~ {truth:<16} mb pl={:.3} {}", mb.evidence.plausibility, mark(mb.reject));
        for stat in [Statistic::Ks, Statistic::Ad, Statistic::Cvm] {
            let t = gof_test(stat, &values, &f0, alpha, 5000, root.named("null").named(stat.name()))?;
            print!("  {stat} p={:.3} {}", t.p_value, mark(t.reject));
        }
        println!();
    }
    Ok(())
}

fn mark(reject: bool) -> &'static str {
    if reject {
        "R"
    } else {
        "-"
    }
}
