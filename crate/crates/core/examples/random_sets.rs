//! Predictive random sets and their noncoverage.
//!
//! Run with `cargo run --example random_sets`.

use weakbelief::prs::{draw, noncoverage, AuxPoint, PrsFamily};
use weakbelief::{MonteCarloParams, RngStream};

fn main() -> weakbelief::Result<()> {
    let mut rng = RngStream::new(1, 0).rng();
    let mc = MonteCarloParams::new(1000, 20_000);

    let interval = PrsFamily::interval(0.4);
    let d = draw(&interval, &mut rng)?;
    println!("interval draw: center {:?}, box {:?}", d.center.coords(), d.box_bounds());
    for u in [0.05, 0.3, 0.5, 0.95] {
        let q = noncoverage(&interval, &AuxPoint::Unit(vec![u]), &mc, &mut rng)?;
        println!("  Q(u={u}) = {:.4}", q.value);
    }

    // every set contains its own center
    for fam in [
        PrsFamily::rectangle(3, 0.3),
        PrsFamily::kl_ball(5, 0.2),
        PrsFamily::beta_box_hier(8, 1.5),
    ] {
        let d = draw(&fam, &mut rng)?;
        println!("{:<14} dim {} contains its center: {}", fam.shape.name(), fam.dim, d.contains(&d.center)?);
    }

    // Monte Carlo noncoverage of a fixed simplex point, shrinking as ω grows
    let target = AuxPoint::Simplex { r: 4.0, p: vec![0.1, 0.2, 0.3, 0.4] };
    for omega in [0.05, 0.2, 0.5, 1.0] {
        let q = noncoverage(&PrsFamily::kl_ball(4, omega), &target, &mc, &mut rng)?;
        println!("KL ball omega={omega:<4}: Q = {:.4} ± {:.4}", q.value, q.se);
    }
    Ok(())
}
