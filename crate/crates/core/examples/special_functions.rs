//! Special functions and reproducible random streams.
//!
//! Run with `cargo run --example special_functions`.

use weakbelief::specfun::{
    inv_reg_inc_beta, reg_inc_beta, sample_ordered_uniforms, sample_uniform_simplex, std_normal_cdf,
    std_normal_quantile, IncBeta,
};
use weakbelief::RngStream;

fn main() -> weakbelief::Result<()> {
    println!("Phi(1.96)        = {:.10}", std_normal_cdf(1.96)?);
    println!("Phi^-1(0.975)    = {:.10}", std_normal_quantile(0.975)?);
    println!("I_0.3(2, 5)      = {:.12}", reg_inc_beta(0.3, 2.0, 5.0)?);
    println!("I^-1_0.5(2, 5)   = {:.12}", inv_reg_inc_beta(0.5, 2.0, 5.0)?);

    // the k-th of n uniform order statistics is Beta(k, n-k+1)
    let (n, k) = (10, 3);
    let law = IncBeta::new(k as f64, (n - k + 1) as f64)?;
    println!("median of U_(3) among 10 = {:.6}", law.quantile(0.5));

    // streams are addressed, not advanced: child(7) is the same everywhere
    let root = RngStream::new(42, 0);
    let a = sample_uniform_simplex(4, &mut root.named("simplex").child(7).rng())?;
    let b = sample_uniform_simplex(4, &mut root.named("simplex").child(7).rng())?;
    assert_eq!(a, b);
    println!("simplex draw     = {a:.4?}");
    let u = sample_ordered_uniforms(5, &mut root.named("order").rng())?;
    println!("ordered uniforms = {:.4?}", u.as_slice());
    Ok(())
}
