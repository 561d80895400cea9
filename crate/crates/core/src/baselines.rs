//! Classical comparators: the likelihood-ratio test of homogeneity and the
//! Kolmogorov–Smirnov, Anderson–Darling and Cramér–von Mises goodness-of-fit
//! tests, all with Monte Carlo critical values.
//!
//! Every statistic here rejects for large values. Under its null each one is
//! distribution-free (the LR statistic by scale invariance, the EDF
//! statistics because `F0(X_i)` is uniform for continuous `F0`), so one null
//! sample per `(statistic, n)` serves every dataset and level.

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::models::{probability_transform, Cdf};
use crate::specfun::fill_ordered_uniforms;
use crate::{binomial_se, Error, Result, RngStream};

pub const MIN_NULL_REPS: usize = 1000;
const CACHE_MAGIC: &str = "# weakbelief null distribution v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    Lr,
    Ks,
    Ad,
    Cvm,
}

impl Statistic {
    pub const ALL: [Statistic; 4] = [Statistic::Lr, Statistic::Ks, Statistic::Ad, Statistic::Cvm];

    pub fn name(self) -> &'static str {
        match self {
            Statistic::Lr => "lr",
            Statistic::Ks => "ks",
            Statistic::Ad => "ad",
            Statistic::Cvm => "cvm",
        }
    }

    /// Statistic of one null dataset of size `n`.
    fn sample_null<R: Rng + ?Sized>(self, n: usize, rng: &mut R, buf: &mut Vec<f64>) -> f64 {
        match self {
            Statistic::Lr => {
                buf.clear();
                buf.extend((0..n).map(|_| -> f64 { Exp1.sample(rng) }));
                lr_unchecked(buf)
            }
            _ => {
                fill_ordered_uniforms(buf, n, rng);
                self.of_uniforms(buf)
            }
        }
    }

    /// EDF statistic from sorted `F0(X_(i))`.
    fn of_uniforms(self, t: &[f64]) -> f64 {
        match self {
            Statistic::Ks => ks_from_sorted(t),
            Statistic::Ad => ad_from_sorted(t),
            Statistic::Cvm => cvm_from_sorted(t),
            Statistic::Lr => unreachable!("the LR statistic is not an EDF statistic"),
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lr" => Ok(Statistic::Lr),
            "ks" => Ok(Statistic::Ks),
            "ad" => Ok(Statistic::Ad),
            "cvm" | "cv" => Ok(Statistic::Cvm),
            other => Err(Error::domain(format!("unknown test statistic {other:?}"))),
        }
    }
}

/// `n·K(u_n, P̂)` with `P̂ = X/ΣX`, i.e. `n(log AM - log GM)`.
pub fn lr_statistic(x: &[f64]) -> Result<f64> {
    if x.len() < 2 {
        return Err(Error::domain("LR statistic needs at least two observations"));
    }
    if let Some(bad) = x.iter().find(|&&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::domain(format!("LR statistic needs positive data, got {bad}")));
    }
    Ok(lr_unchecked(x))
}

fn lr_unchecked(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let total: f64 = x.iter().sum();
    // Σ_i (1/n) log((1/n) / (x_i/Σx)) scaled by n
    let s: f64 = x.iter().map(|&v| (total / (n * v)).ln()).sum();
    s.max(0.0)
}

fn ks_from_sorted(t: &[f64]) -> f64 {
    let n = t.len() as f64;
    t.iter()
        .enumerate()
        .map(|(i, &f)| ((i + 1) as f64 / n - f).max(f - i as f64 / n))
        .fold(0.0, f64::max)
}

fn cvm_from_sorted(t: &[f64]) -> f64 {
    let n = t.len() as f64;
    1.0 / (12.0 * n)
        + t.iter()
            .enumerate()
            .map(|(i, &f)| (f - (2 * i + 1) as f64 / (2.0 * n)).powi(2))
            .sum::<f64>()
}

fn ad_from_sorted(t: &[f64]) -> f64 {
    if t.iter().any(|&f| f <= 0.0 || f >= 1.0) {
        return f64::INFINITY;
    }
    let n = t.len();
    let s: f64 = (0..n)
        .map(|i| (2 * i + 1) as f64 * (t[i].ln() + (-t[n - 1 - i]).ln_1p()))
        .sum();
    -(n as f64) - s / n as f64
}

pub fn ks_statistic(x: &[f64], f0: &Cdf) -> Result<f64> {
    Ok(ks_from_sorted(&probability_transform(x, f0)?))
}

/// Anderson–Darling; `+∞` when some `F0(X_i)` is 0 or 1.
pub fn ad_statistic(x: &[f64], f0: &Cdf) -> Result<f64> {
    Ok(ad_from_sorted(&probability_transform(x, f0)?))
}

pub fn cvm_statistic(x: &[f64], f0: &Cdf) -> Result<f64> {
    Ok(cvm_from_sorted(&probability_transform(x, f0)?))
}

/// Value of `statistic` on data `x` (`f0` is ignored by the LR statistic).
pub fn statistic_value(statistic: Statistic, x: &[f64], f0: &Cdf) -> Result<f64> {
    match statistic {
        Statistic::Lr => lr_statistic(x),
        Statistic::Ks => ks_statistic(x, f0),
        Statistic::Ad => ad_statistic(x, f0),
        Statistic::Cvm => cvm_statistic(x, f0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub critical_value: f64,
    /// Fraction of null replications at least as large as the statistic.
    pub p_value: f64,
    pub p_value_se: f64,
    pub reject: bool,
    pub reps_used: usize,
}

/// Sorted Monte Carlo sample of a statistic under its null.
#[derive(Debug, Clone, PartialEq)]
pub struct NullDistribution {
    pub statistic: Statistic,
    pub n: usize,
    pub stream: RngStream,
    values: Vec<f64>,
}

impl NullDistribution {
    pub fn simulate(statistic: Statistic, n: usize, reps: usize, stream: RngStream) -> Result<Self> {
        if reps < MIN_NULL_REPS {
            return Err(Error::Config(format!(
                "null replications {reps} below the minimum of {MIN_NULL_REPS}"
            )));
        }
        let min_n = if statistic == Statistic::Lr { 2 } else { 1 };
        if n < min_n {
            return Err(Error::domain(format!("{statistic} null needs n >= {min_n}")));
        }
        const CHUNK: usize = 256;
        let mut values: Vec<f64> = (0..reps.div_ceil(CHUNK))
            .into_par_iter()
            .flat_map_iter(|c| {
                let mut rng = stream.child(c as u64).rng();
                let mut buf = Vec::with_capacity(n);
                let len = CHUNK.min(reps - c * CHUNK);
                (0..len)
                    .map(|_| statistic.sample_null(n, &mut rng, &mut buf))
                    .collect::<Vec<_>>()
            })
            .collect();
        values.sort_by(f64::total_cmp);
        Ok(Self { statistic, n, stream, values })
    }

    pub fn reps(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Empirical `(1-α)` quantile: the `⌈(1-α)R⌉`-th order statistic.
    pub fn critical_value(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::domain(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        let r = self.values.len();
        let k = (((1.0 - alpha) * r as f64) - 1e-9).ceil().max(1.0) as usize;
        Ok(self.values[k.min(r) - 1])
    }

    pub fn p_value(&self, statistic: f64) -> (f64, f64) {
        let below = self.values.partition_point(|&v| v < statistic);
        let p = (self.values.len() - below) as f64 / self.values.len() as f64;
        (p, binomial_se(p, self.values.len()))
    }

    /// Reject when the statistic exceeds the critical value.
    pub fn decide(&self, statistic: f64, alpha: f64) -> Result<TestResult> {
        let critical_value = self.critical_value(alpha)?;
        let (p_value, p_value_se) = self.p_value(statistic);
        Ok(TestResult {
            statistic,
            critical_value,
            p_value,
            p_value_se,
            reject: statistic > critical_value,
            reps_used: self.reps(),
        })
    }

    /// Run the test on data `x`.
    pub fn test(&self, x: &[f64], f0: &Cdf, alpha: f64) -> Result<TestResult> {
        if x.len() != self.n {
            return Err(Error::Config(format!(
                "null distribution is for n = {}, data have n = {}",
                self.n,
                x.len()
            )));
        }
        self.decide(statistic_value(self.statistic, x, f0)?, alpha)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = format!(
            "{CACHE_MAGIC}\nstatistic={}\nn={}\nreps={}\nseed={}\nstream={}\n",
            self.statistic,
            self.n,
            self.reps(),
            self.stream.seed,
            self.stream.stream
        );
        for v in &self.values {
            text.push_str(&format!("{v:.17e}\n"));
        }
        write_atomic(path, text.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, l)) if l == CACHE_MAGIC => {}
            _ => return Err(Error::Parse { line: 1, msg: "not a null distribution cache file".into() }),
        }
        let mut header = std::collections::HashMap::new();
        let mut values = Vec::new();
        for (i, line) in lines {
            let perr = |msg: String| Error::Parse { line: i + 1, msg };
            if let Some((k, v)) = line.split_once('=') {
                header.insert(k.to_string(), (i + 1, v.to_string()));
            } else {
                values.push(line.trim().parse::<f64>().map_err(|e| perr(format!("bad value: {e}")))?);
            }
        }
        let field = |k: &str| -> Result<(usize, String)> {
            header
                .get(k)
                .cloned()
                .ok_or_else(|| Error::Parse { line: 1, msg: format!("missing header field {k}") })
        };
        let num = |k: &str| -> Result<u64> {
            let (line, v) = field(k)?;
            v.parse().map_err(|_| Error::Parse { line, msg: format!("bad {k}: {v}") })
        };
        let (line, stat) = field("statistic")?;
        let statistic = stat.parse().map_err(|_| Error::Parse { line, msg: format!("bad statistic {stat}") })?;
        let reps = num("reps")? as usize;
        if values.len() != reps {
            return Err(Error::Parse {
                line: text.lines().count(),
                msg: format!("expected {reps} values, found {}", values.len()),
            });
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Parse { line: 1, msg: "null values are not sorted".into() });
        }
        Ok(Self {
            statistic,
            n: num("n")? as usize,
            stream: RngStream::new(num("seed")?, num("stream")?),
            values,
        })
    }
}

/// Write to a temporary sibling, then rename over `path`.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// On-disk store of null distributions keyed by
/// `(statistic, n, reps, seed, stream)`.
#[derive(Debug, Clone)]
pub struct NullCache {
    dir: PathBuf,
}

impl NullCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn path(&self, statistic: Statistic, n: usize, reps: usize, stream: RngStream) -> PathBuf {
        self.dir.join(format!(
            "null-{statistic}-n{n}-r{reps}-{:016x}-{:016x}.txt",
            stream.seed, stream.stream
        ))
    }

    /// Load the cached sample, or simulate and store it. Unreadable or
    /// mismatched files are regenerated.
    pub fn get(&self, statistic: Statistic, n: usize, reps: usize, stream: RngStream) -> Result<NullDistribution> {
        let path = self.path(statistic, n, reps, stream);
        if let Ok(d) = NullDistribution::load(&path) {
            if d.statistic == statistic && d.n == n && d.reps() == reps && d.stream == stream {
                return Ok(d);
            }
        }
        let d = NullDistribution::simulate(statistic, n, reps, stream)?;
        d.save(&path)?;
        Ok(d)
    }
}

/// Likelihood-ratio test of homogeneity with a freshly simulated null.
pub fn lr_test(x: &[f64], alpha: f64, reps: usize, stream: RngStream) -> Result<TestResult> {
    let stat = lr_statistic(x)?;
    NullDistribution::simulate(Statistic::Lr, x.len(), reps, stream)?.decide(stat, alpha)
}

/// EDF goodness-of-fit test of `F = F0` with a freshly simulated null.
pub fn gof_test(statistic: Statistic, x: &[f64], f0: &Cdf, alpha: f64, reps: usize, stream: RngStream) -> Result<TestResult> {
    if statistic == Statistic::Lr {
        return Err(Error::domain("the LR statistic is not a goodness-of-fit test"));
    }
    let stat = statistic_value(statistic, x, f0)?;
    NullDistribution::simulate(statistic, x.len(), reps, stream)?.decide(stat, alpha)
}
