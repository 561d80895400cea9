use std::path::{Path, PathBuf};

use crate::baselines::write_atomic;
use crate::calibrate::{solve_mb, CalibrationResult, SaParams};
use crate::prs::PrsFamily;
use crate::{Result, RngStream};

/// Stream used to calibrate `family` at `alpha` under a run seed, so the same
/// calibration is reproduced by every experiment that needs it.
pub fn calibration_stream(seed: u64, family: &PrsFamily, alpha: f64) -> RngStream {
    RngStream::new(seed, 0)
        .named("calibrate")
        .named(family.shape.name())
        .child(family.dim as u64)
        .child(alpha.to_bits())
}

fn fnv(text: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Cache file for `(family kind, n, α, SA settings, seed)`.
pub fn calibration_path(dir: &Path, family: &PrsFamily, alpha: f64, sa: &SaParams, seed: u64) -> PathBuf {
    let sa_key = fnv(&serde_json::to_string(sa).expect("SA settings serialize"));
    dir.join(format!(
        "calib-{}-n{}-a{alpha}-seed{seed}-{sa_key:016x}.json",
        family.shape.name(),
        family.dim
    ))
}

/// Solve for `ω(α)`, reusing a cached result when `dir` holds one with the
/// same key. Non-converged results are returned but never cached.
pub fn calibrate_cached(
    family: &PrsFamily,
    alpha: f64,
    sa: &SaParams,
    seed: u64,
    dir: Option<&Path>,
) -> Result<CalibrationResult> {
    let path = dir.map(|d| calibration_path(d, family, alpha, sa, seed));
    if let Some(p) = &path {
        if let Ok(text) = std::fs::read_to_string(p) {
            if let Ok(res) = serde_json::from_str::<CalibrationResult>(&text) {
                if res.family.shape == family.shape && res.family.dim == family.dim && res.alpha == alpha {
                    return Ok(res);
                }
            }
        }
    }
    let res = solve_mb(family, alpha, sa, calibration_stream(seed, family, alpha))?;
    if let (Some(p), true) = (&path, res.converged) {
        write_atomic(p, serde_json::to_string(&res)?.as_bytes())?;
    }
    Ok(res)
}
