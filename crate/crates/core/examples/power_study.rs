//! A small power study through the experiment harness, written to CSV,
//! JSON and SVG.
//!
//! Run with `cargo run --example power_study [out-dir]`. Bigger studies go
//! through the CLI, e.g. `weakbelief power --config configs/homogeneity_power.conf`.

use std::path::PathBuf;

use weakbelief::harness::{csv_path, plot, run_to_dir, ExperimentSpec, PlotKind};

const CONFIG: &str = "
experiment = onesample-power
null = uniform(0,1)
alt = beta(0.6,0.6)
tests = mb, ks, ad, cvm
grid = 10, 20, 40
replications = 200
null_reps = 2000
sa.preset = desk
mc.inner = 5000
seed = 17
";

fn main() -> weakbelief::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("weakbelief-power"));
    let mut spec = ExperimentSpec::parse(CONFIG)?;
    spec.cache_dir = Some(out.join("cache"));
    let manifest = run_to_dir(&spec, &out, None)?;
    println!("{} rows in {:.1}s", manifest.rows, manifest.wall_clock_seconds);
    for c in &manifest.calibrations {
        println!("  n={:<3} omega* = {:.4}", c.n, c.omega_star);
    }
    let csv = csv_path(&out, &spec.id);
    print!("{}", std::fs::read_to_string(&csv)?);
    let svg = csv.with_extension("svg");
    plot(&csv, PlotKind::Power, &svg)?;
    println!("plot: {}", svg.display());
    Ok(())
}
