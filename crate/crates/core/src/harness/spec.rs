use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{Statistic, MIN_NULL_REPS};
use crate::calibrate::SaParams;
use crate::models::Cdf;
use crate::prs::{PrsFamily, PrsShape};
use crate::{Error, MonteCarloParams, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    BeliefCurve,
    CredibilityCurve,
    Calibrate,
    HomogeneityPower,
    OnesamplePower,
    Type1Size,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::BeliefCurve => "belief-curve",
            ExperimentKind::CredibilityCurve => "credibility-curve",
            ExperimentKind::Calibrate => "calibrate",
            ExperimentKind::HomogeneityPower => "homogeneity-power",
            ExperimentKind::OnesamplePower => "onesample-power",
            ExperimentKind::Type1Size => "type1-size",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "belief-curve" => ExperimentKind::BeliefCurve,
            "credibility-curve" => ExperimentKind::CredibilityCurve,
            "calibrate" => ExperimentKind::Calibrate,
            "homogeneity-power" => ExperimentKind::HomogeneityPower,
            "onesample-power" => ExperimentKind::OnesamplePower,
            "type1-size" => ExperimentKind::Type1Size,
            other => return Err(format!("unknown experiment kind `{other}`")),
        })
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Normal,
    Bernoulli,
    Homogeneity,
    Onesample,
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "normal" => ModelKind::Normal,
            "bernoulli" => ModelKind::Bernoulli,
            "homogeneity" => ModelKind::Homogeneity,
            "onesample" | "one-sample" => ModelKind::Onesample,
            other => return Err(format!("unknown model `{other}`")),
        })
    }
}

/// A test compared in a power or size study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum TestKind {
    /// Maximal-belief plausibility test.
    Mb,
    Baseline(Statistic),
}

impl TestKind {
    pub fn name(self) -> &'static str {
        match self {
            TestKind::Mb => "mb",
            TestKind::Baseline(s) => s.name(),
        }
    }
}

impl From<TestKind> for String {
    fn from(t: TestKind) -> String {
        t.name().to_string()
    }
}

impl TryFrom<String> for TestKind {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl FromStr for TestKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "mb" {
            return Ok(TestKind::Mb);
        }
        s.parse::<Statistic>()
            .map(TestKind::Baseline)
            .map_err(|_| format!("unknown test `{s}`"))
    }
}

/// One experiment, as read from a flat `key = value` config.
///
/// The meaning of `grid` depends on the kind: θ for belief curves, ω for
/// credibility curves, α for calibration, the rate ratio for homogeneity
/// power and the sample size for one-sample power and type-I size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub experiment: ExperimentKind,
    pub id: String,
    pub model: Option<ModelKind>,
    pub family: Option<PrsShape>,
    pub dim: Option<usize>,
    pub x: Option<f64>,
    pub n: Option<usize>,
    pub successes: Option<usize>,
    pub n1: Option<usize>,
    pub n2: Option<usize>,
    pub null: Cdf,
    pub alt: Option<Cdf>,
    pub tests: Vec<TestKind>,
    pub grid: Vec<f64>,
    pub omegas: Vec<f64>,
    pub replications: usize,
    pub alpha: f64,
    pub seed: u64,
    pub mc: MonteCarloParams,
    pub sa: SaParams,
    pub null_reps: usize,
    /// Share one PRS pool across the replications of a grid point.
    pub shared_pool: bool,
    #[serde(skip)]
    pub cache_dir: Option<PathBuf>,
}

/// Power-study replications used unless the config says otherwise; raise
/// it to 1000 or more for publication-grade curves.
pub const DEFAULT_REPLICATIONS: usize = 500;

fn need(bad: &mut Vec<String>, cond: bool, msg: &str) {
    if !cond {
        bad.push(msg.to_string());
    }
}

impl ExperimentSpec {
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            id: experiment.name().to_string(),
            model: None,
            family: None,
            dim: None,
            x: None,
            n: None,
            successes: None,
            n1: None,
            n2: None,
            null: Cdf::UNIFORM,
            alt: None,
            tests: Vec::new(),
            grid: Vec::new(),
            omegas: Vec::new(),
            replications: DEFAULT_REPLICATIONS,
            alpha: 0.05,
            seed: 0,
            mc: MonteCarloParams::default(),
            sa: SaParams::default(),
            null_reps: 10_000,
            shared_pool: false,
            cache_dir: None,
        }
    }

    /// Parse a config file of `key = value` lines in any order. `#` starts
    /// a comment; `experiment` is required.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Parse { line: i + 1, msg: format!("expected `key = value`, got `{line}`") });
            };
            pairs.push((i + 1, k.trim().to_string(), v.trim().to_string()));
        }
        let Some(kind) = pairs.iter().find(|(_, k, _)| k == "experiment") else {
            return Err(Error::Validation(vec!["experiment: missing".into()]));
        };
        let kind = kind.2.parse().map_err(|e: String| Error::Parse { line: kind.0, msg: e })?;
        let mut spec = Self::new(kind);
        // the preset must apply before individual sa.* keys
        if let Some((line, _, v)) = pairs.iter().find(|(_, k, _)| k == "sa.preset") {
            spec.set("sa.preset", v).map_err(|msg| Error::Parse { line: *line, msg })?;
        }
        for (line, k, v) in &pairs {
            if k == "sa.preset" {
                continue;
            }
            spec.set(k, v).map_err(|msg| Error::Parse { line: *line, msg })?;
        }
        Ok(spec)
    }

    /// Apply one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
            v.parse().map_err(|_| format!("{key}: cannot parse `{v}`"))
        }
        let v = value.trim();
        match key {
            "experiment" => {
                let kind: ExperimentKind = v.parse()?;
                if kind != self.experiment {
                    let id_was_default = self.id == self.experiment.name();
                    self.experiment = kind;
                    if id_was_default {
                        self.id = kind.name().to_string();
                    }
                }
            }
            "id" => {
                if v.is_empty() || !v.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
                    return Err(format!("id: `{v}` must be nonempty and use only [A-Za-z0-9-_.]"));
                }
                self.id = v.to_string();
            }
            "model" => self.model = Some(v.parse()?),
            "family" => self.family = Some(PrsShape::parse(v).map_err(|e| e.to_string())?),
            "dim" => self.dim = Some(num(key, v)?),
            "x" => self.x = Some(num(key, v)?),
            "n" => self.n = Some(num(key, v)?),
            "successes" => self.successes = Some(num(key, v)?),
            "n1" => self.n1 = Some(num(key, v)?),
            "n2" => self.n2 = Some(num(key, v)?),
            "null" => self.null = Cdf::parse(v).map_err(|e| e.to_string())?,
            "alt" => self.alt = Some(Cdf::parse(v).map_err(|e| e.to_string())?),
            "tests" => {
                self.tests = split_list(v).map(str::parse).collect::<std::result::Result<_, _>>()?;
            }
            "grid" => self.grid = parse_grid(key, v)?,
            "omegas" => self.omegas = parse_grid(key, v)?,
            "replications" | "reps" => self.replications = num(key, v)?,
            "alpha" => self.alpha = num(key, v)?,
            "seed" => self.seed = num(key, v)?,
            "null_reps" => self.null_reps = num(key, v)?,
            "shared_pool" => self.shared_pool = num(key, v)?,
            "cache_dir" => self.cache_dir = Some(PathBuf::from(v)),
            "mc.inner" => self.mc.inner = num(key, v)?,
            "mc.outer" => self.mc.outer = num(key, v)?,
            "mc.conflict_probe" => self.mc.conflict_probe = num(key, v)?,
            "sa.preset" => {
                self.sa = match v {
                    "default" => SaParams::default(),
                    "desk" => SaParams::desk(),
                    other => return Err(format!("sa.preset: unknown preset `{other}`")),
                }
            }
            "sa.max_iters" => self.sa.max_iters = num(key, v)?,
            "sa.batch" => self.sa.batch = num(key, v)?,
            "sa.gain" => self.sa.gain = Some(num(key, v)?),
            "sa.t0" => self.sa.t0 = num(key, v)?,
            "sa.tail_fraction" => self.sa.tail_fraction = num(key, v)?,
            "sa.inner_early" => self.sa.inner_early = num(key, v)?,
            "sa.inner_late" => self.sa.inner_late = num(key, v)?,
            "sa.tol" => self.sa.tol = num(key, v)?,
            "sa.recheck_outer" => self.sa.recheck_outer = num(key, v)?,
            "sa.recheck_inner" => self.sa.recheck_inner = num(key, v)?,
            "sa.warm_grid" => self.sa.warm_grid = num(key, v)?,
            "sa.warm_outer" => self.sa.warm_outer = num(key, v)?,
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    /// Render as a config file that [`ExperimentSpec::parse`] reads back.
    pub fn to_config(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        put("experiment", self.experiment.to_string());
        put("id", self.id.clone());
        if let Some(m) = self.model {
            put("model", serde_json::to_value(m).unwrap().as_str().unwrap().to_string());
        }
        if let Some(f) = self.family {
            put("family", f.name().to_string());
        }
        let opt = |v: Option<usize>| v.map(|x| x.to_string());
        for (k, v) in [("dim", opt(self.dim)), ("n", opt(self.n)), ("successes", opt(self.successes)), ("n1", opt(self.n1)), ("n2", opt(self.n2))] {
            if let Some(v) = v {
                put(k, v);
            }
        }
        if let Some(x) = self.x {
            put("x", format!("{x:?}"));
        }
        put("null", self.null.to_string());
        if let Some(a) = self.alt {
            put("alt", a.to_string());
        }
        if !self.tests.is_empty() {
            put("tests", self.tests.iter().map(|t| t.name()).collect::<Vec<_>>().join(","));
        }
        let list = |g: &[f64]| g.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(",");
        if !self.grid.is_empty() {
            put("grid", list(&self.grid));
        }
        if !self.omegas.is_empty() {
            put("omegas", list(&self.omegas));
        }
        put("replications", self.replications.to_string());
        put("alpha", format!("{:?}", self.alpha));
        put("seed", self.seed.to_string());
        put("null_reps", self.null_reps.to_string());
        put("shared_pool", self.shared_pool.to_string());
        put("mc.inner", self.mc.inner.to_string());
        put("mc.outer", self.mc.outer.to_string());
        put("mc.conflict_probe", self.mc.conflict_probe.to_string());
        let sa = &self.sa;
        put("sa.max_iters", sa.max_iters.to_string());
        put("sa.batch", sa.batch.to_string());
        if let Some(g) = sa.gain {
            put("sa.gain", format!("{g:?}"));
        }
        put("sa.t0", format!("{:?}", sa.t0));
        put("sa.tail_fraction", format!("{:?}", sa.tail_fraction));
        put("sa.inner_early", sa.inner_early.to_string());
        put("sa.inner_late", sa.inner_late.to_string());
        put("sa.tol", format!("{:?}", sa.tol));
        put("sa.recheck_outer", sa.recheck_outer.to_string());
        put("sa.recheck_inner", sa.recheck_inner.to_string());
        put("sa.warm_grid", sa.warm_grid.to_string());
        put("sa.warm_outer", sa.warm_outer.to_string());
        out
    }

    /// Check every field; the error lists all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut bad: Vec<String> = Vec::new();
        need(&mut bad, self.replications >= 1, "replications: must be >= 1");
        need(&mut bad, !self.grid.is_empty(), "grid: must be nonempty");
        need(&mut bad, self.grid.iter().all(|v| v.is_finite()), "grid: values must be finite");
        need(&mut bad, self.alpha > 0.0 && self.alpha < 1.0, "alpha: must lie in (0, 1)");
        let grid_ints = self.grid.iter().all(|&v| v >= 1.0 && v.fract() == 0.0);
        let uses_mb = self.tests.contains(&TestKind::Mb);
        let baselines: Vec<Statistic> = self
            .tests
            .iter()
            .filter_map(|t| match t {
                TestKind::Baseline(s) => Some(*s),
                TestKind::Mb => None,
            })
            .collect();
        match self.experiment {
            ExperimentKind::BeliefCurve => {
                need(&mut bad, !self.omegas.is_empty(), "omegas: must be nonempty");
                need(&mut bad, self.omegas.iter().all(|w| (0.0..=1.0).contains(w)), "omegas: must lie in [0, 1]");
                match self.model {
                    Some(ModelKind::Normal) => need(&mut bad, self.x.is_some_and(f64::is_finite), "x: required (finite) for the normal model"),
                    Some(ModelKind::Bernoulli) => {
                        need(&mut bad, self.n.is_some(), "n: required for the Bernoulli model");
                        need(&mut bad, self.successes.is_some(), "successes: required for the Bernoulli model");
                        need(&mut bad, matches!((self.n, self.successes), (Some(n), Some(k)) if k <= n),
                            "successes: must not exceed n",
                        );
                        need(&mut bad, self.grid.iter().all(|t| (0.0..=1.0).contains(t)), "grid: θ must lie in [0, 1]");
                    }
                    _ => need(&mut bad, false, "model: belief-curve needs normal or bernoulli"),
                }
            }
            ExperimentKind::CredibilityCurve | ExperimentKind::Calibrate => {
                match (self.family, self.dim) {
                    (Some(shape), dim) => {
                        let dim = dim.unwrap_or(1);
                        let fam = PrsFamily { shape, dim, omega: 0.0 };
                        if let Err(e) = fam.validate() {
                            bad.push(format!("dim: {e}"));
                        }
                        if self.experiment == ExperimentKind::Calibrate {
                            if matches!(shape, PrsShape::Point | PrsShape::Vacuous) {
                                bad.push("family: has no index to calibrate".into());
                            }
                        } else if let Some(vac) = fam.vacuous_omega() {
                            if !self.grid.iter().all(|&w| (0.0..=vac).contains(&w)) {
                                bad.push(format!("grid: ω must lie in [0, {vac}]"));
                            }
                        }
                    }
                    (None, _) => bad.push("family: required".into()),
                }
                if self.experiment == ExperimentKind::Calibrate {
                    if !self.grid.iter().all(|&a| a > 0.0 && a < 1.0) {
                        bad.push("grid: α values must lie in (0, 1)".into());
                    }
                    self.check_sa(&mut bad);
                } else {
                    self.check_mc(&mut bad, matches!(self.family, Some(PrsShape::KlBall | PrsShape::BetaBoxHier)));
                }
            }
            ExperimentKind::HomogeneityPower => {
                need(&mut bad, self.n1.is_some_and(|v| v >= 1), "n1: required, >= 1");
                need(&mut bad, self.n2.is_some_and(|v| v >= 1), "n2: required, >= 1");
                need(&mut bad, self.grid.iter().all(|&t| t > 0.0), "grid: rate ratios must be positive");
                self.check_tests(&mut bad, &[Statistic::Lr]);
            }
            ExperimentKind::OnesamplePower => {
                match self.alt {
                    Some(a) => {
                        if let Err(e) = a.validate() {
                            bad.push(format!("alt: {e}"));
                        }
                    }
                    None => bad.push("alt: required".into()),
                }
                if let Err(e) = self.null.validate() {
                    bad.push(format!("null: {e}"));
                }
                need(&mut bad, grid_ints, "grid: sample sizes must be integers >= 1");
                self.check_tests(&mut bad, &[Statistic::Ks, Statistic::Ad, Statistic::Cvm]);
            }
            ExperimentKind::Type1Size => match self.model {
                Some(ModelKind::Homogeneity) => {
                    need(&mut bad, grid_ints && self.grid.iter().all(|&n| n >= 2.0), "grid: sample sizes must be integers >= 2");
                    self.check_tests(&mut bad, &[Statistic::Lr]);
                }
                Some(ModelKind::Onesample) => {
                    need(&mut bad, grid_ints, "grid: sample sizes must be integers >= 1");
                    if let Err(e) = self.null.validate() {
                        bad.push(format!("null: {e}"));
                    }
                    self.check_tests(&mut bad, &[Statistic::Ks, Statistic::Ad, Statistic::Cvm]);
                }
                _ => bad.push("model: type1-size needs homogeneity or onesample".into()),
            },
        }
        if matches!(self.experiment, ExperimentKind::HomogeneityPower | ExperimentKind::OnesamplePower | ExperimentKind::Type1Size) {
            if uses_mb {
                self.check_mc(&mut bad, true);
                self.check_sa(&mut bad);
            }
            if !baselines.is_empty() && self.null_reps < MIN_NULL_REPS {
                bad.push(format!("null_reps: must be >= {MIN_NULL_REPS}"));
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(bad))
        }
    }

    fn check_tests(&self, bad: &mut Vec<String>, allowed: &[Statistic]) {
        if self.tests.is_empty() {
            bad.push("tests: must name at least one test".into());
        }
        for t in &self.tests {
            if let TestKind::Baseline(s) = t {
                if !allowed.contains(s) {
                    bad.push(format!("tests: `{s}` does not apply to {}", self.experiment));
                }
            }
        }
    }

    fn check_mc(&self, bad: &mut Vec<String>, inner: bool) {
        if self.mc.outer < MonteCarloParams::MIN_OUTER && self.experiment == ExperimentKind::CredibilityCurve {
            bad.push(format!("mc.outer: must be >= {}", MonteCarloParams::MIN_OUTER));
        }
        if inner && self.mc.inner < MonteCarloParams::MIN_INNER {
            bad.push(format!("mc.inner: must be >= {}", MonteCarloParams::MIN_INNER));
        }
    }

    fn check_sa(&self, bad: &mut Vec<String>) {
        let sa = &self.sa;
        if sa.max_iters < 4 {
            bad.push("sa.max_iters: must be >= 4".into());
        }
        if sa.batch < 1 {
            bad.push("sa.batch: must be >= 1".into());
        }
        if !(sa.tail_fraction > 0.0 && sa.tail_fraction <= 1.0) {
            bad.push("sa.tail_fraction: must lie in (0, 1]".into());
        }
        if !(sa.tol > 0.0) {
            bad.push("sa.tol: must be positive".into());
        }
        for (k, v, min) in [
            ("sa.inner_early", sa.inner_early, MonteCarloParams::MIN_INNER),
            ("sa.inner_late", sa.inner_late, MonteCarloParams::MIN_INNER),
            ("sa.recheck_inner", sa.recheck_inner, MonteCarloParams::MIN_INNER),
            ("sa.recheck_outer", sa.recheck_outer, MonteCarloParams::MIN_OUTER),
            ("sa.warm_outer", sa.warm_outer, MonteCarloParams::MIN_OUTER),
        ] {
            if v < min {
                bad.push(format!("{k}: must be >= {min}"));
            }
        }
        if sa.warm_grid < 2 {
            bad.push("sa.warm_grid: must be >= 2".into());
        }
    }
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// `a,b,c` or `start:end:count` (inclusive, evenly spaced).
fn parse_grid(key: &str, v: &str) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = v.split(':').map(str::trim).collect();
    if parts.len() == 3 {
        let bad = || format!("{key}: cannot parse range `{v}`");
        let a: f64 = parts[0].parse().map_err(|_| bad())?;
        let b: f64 = parts[1].parse().map_err(|_| bad())?;
        let k: usize = parts[2].parse().map_err(|_| bad())?;
        return Ok(match k {
            0 => Vec::new(),
            1 => vec![a],
            _ => (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect(),
        });
    }
    split_list(v)
        .map(|s| s.parse::<f64>().map_err(|_| format!("{key}: cannot parse `{s}`")))
        .collect()
}
