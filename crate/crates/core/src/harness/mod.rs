//! Experiment orchestration and its outputs.
//!
//! A run is keyed entirely by its spec and seed. Every replication draws its
//! data and Monte Carlo randomness from a stream derived from
//! `(seed, purpose, grid value, replication)`, so results do not depend on
//! the number of worker threads or on the order tasks finish.

mod cache;
mod output;
mod plot;
mod spec;

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

pub use cache::{calibrate_cached, calibration_path, calibration_stream};
pub use output::{parse_csv, read_csv, to_csv, write_csv, CalibrationNote, Manifest, ResultRow, CSV_HEADER};
pub use plot::{plot, render_svg, PlotKind};
pub use spec::{ExperimentKind, ExperimentSpec, ModelKind, TestKind, DEFAULT_REPLICATIONS};

use crate::baselines::{write_atomic, NullCache, NullDistribution, Statistic};
use crate::calibrate::{credibility_curve, CalibrationResult};
use crate::models::{
    bernoulli_belief, generate_data, homogeneity_plausibility, homogeneity_plausibility_pooled, normal_belief,
    onesample_plausibility, onesample_plausibility_pooled, Cdf, ModelParams, ObservedData,
};
use crate::prs::{BoxPool, KlPool, PrsFamily, PrsShape};
use crate::{binomial_se, Error, Result, RngStream};

/// Rows of a finished run plus the calibrations it used.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    pub calibrations: Vec<CalibrationNote>,
}

/// Execute `spec` on the current rayon pool.
pub fn run(spec: &ExperimentSpec) -> Result<RunOutput> {
    spec.validate()?;
    let mut runner = Runner { spec, calibrations: Vec::new(), calibrated: HashMap::new() };
    let rows = match spec.experiment {
        ExperimentKind::BeliefCurve => runner.belief_curve()?,
        ExperimentKind::CredibilityCurve => runner.credibility()?,
        ExperimentKind::Calibrate => runner.calibrate()?,
        ExperimentKind::HomogeneityPower => {
            let (n1, n2) = (spec.n1.unwrap_or(0), spec.n2.unwrap_or(0));
            let points = spec
                .grid
                .iter()
                .map(|&theta| {
                    let mut rates = vec![1.0; n1];
                    rates.extend(std::iter::repeat_n(theta, n2));
                    Point { value: theta, n: n1 + n2, params: ModelParams::Homogeneity { rates } }
                })
                .collect();
            runner.rejection_study(points)?
        }
        ExperimentKind::OnesamplePower => {
            let alt = spec.alt.unwrap_or(Cdf::UNIFORM);
            let points = sizes(&spec.grid)
                .map(|n| Point { value: n as f64, n, params: ModelParams::OneSample { dist: alt } })
                .collect();
            runner.rejection_study(points)?
        }
        ExperimentKind::Type1Size => {
            let homogeneity = spec.model == Some(ModelKind::Homogeneity);
            let points = sizes(&spec.grid)
                .map(|n| {
                    let params = if homogeneity {
                        ModelParams::Homogeneity { rates: vec![1.0; n] }
                    } else {
                        ModelParams::OneSample { dist: spec.null }
                    };
                    Point { value: n as f64, n, params }
                })
                .collect();
            runner.rejection_study(points)?
        }
    };
    Ok(RunOutput { rows, calibrations: runner.calibrations })
}

/// [`run`] on a dedicated pool of `threads` workers (`None`: rayon's default).
pub fn run_with_threads(spec: &ExperimentSpec, threads: Option<usize>) -> Result<RunOutput> {
    with_threads(threads, || run(spec))?
}

/// Evaluate `f` on a pool of `threads` workers (`None`: rayon's default).
pub fn run_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    with_threads(threads, f)?
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::Config("threads must be >= 1".into())),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Config(format!("cannot start {t} worker threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Paths written by [`run_to_dir`] for an experiment id.
pub fn csv_path(out_dir: &Path, id: &str) -> PathBuf {
    out_dir.join(format!("{id}.csv"))
}

pub fn manifest_path(out_dir: &Path, id: &str) -> PathBuf {
    out_dir.join(format!("{id}.manifest.json"))
}

pub fn failure_path(out_dir: &Path, id: &str) -> PathBuf {
    out_dir.join(format!("{id}.calibration-failure.json"))
}

/// Run `spec` and write `<id>.csv` and `<id>.manifest.json` into `out_dir`.
///
/// When a calibration fails to converge, its full result (trajectory
/// included) goes to `<id>.calibration-failure.json` and the error is
/// returned.
pub fn run_to_dir(spec: &ExperimentSpec, out_dir: &Path, threads: Option<usize>) -> Result<Manifest> {
    spec.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let start = Instant::now();
    let (out, used) = with_threads(threads, || (run(spec), rayon::current_num_threads()))?;
    let out = match out {
        Ok(o) => o,
        Err(Error::Calibration(res)) => {
            write_atomic(&failure_path(out_dir, &spec.id), serde_json::to_string_pretty(&res)?.as_bytes())?;
            return Err(Error::Calibration(res));
        }
        Err(e) => return Err(e),
    };
    let csv = csv_path(out_dir, &spec.id);
    write_csv(&csv, &out.rows)?;
    let manifest = Manifest {
        spec: spec.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        threads: used,
        csv: csv.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
        rows: out.rows.len(),
        calibrations: out.calibrations,
    };
    manifest.save(&manifest_path(out_dir, &spec.id))?;
    Ok(manifest)
}

fn sizes(grid: &[f64]) -> impl Iterator<Item = usize> + '_ {
    grid.iter().map(|&v| v as usize)
}

struct Point {
    value: f64,
    n: usize,
    params: ModelParams,
}

// per grid point: the MB index and the baseline nulls
struct Arms {
    omega: Option<f64>,
    nulls: Vec<Option<NullDistribution>>,
    kl_pool: Option<KlPool>,
    box_pool: Option<BoxPool>,
}

struct Runner<'a> {
    spec: &'a ExperimentSpec,
    calibrations: Vec<CalibrationNote>,
    calibrated: HashMap<(PrsShape, usize), f64>,
}

impl Runner<'_> {
    fn root(&self) -> RngStream {
        RngStream::new(self.spec.seed, 0)
    }

    #[allow(clippy::too_many_arguments)]
    fn row(&self, test: &str, param1: f64, param2: f64, n: usize, estimate: f64, se: f64, reps: usize) -> ResultRow {
        ResultRow {
            experiment: self.spec.id.clone(),
            test: test.to_string(),
            param1,
            param2,
            n,
            estimate,
            se,
            reps,
            seed: self.spec.seed,
        }
    }

    fn belief_curve(&self) -> Result<Vec<ResultRow>> {
        let s = self.spec;
        let mut rows = Vec::with_capacity(2 * s.omegas.len() * s.grid.len());
        for &omega in &s.omegas {
            for &theta in &s.grid {
                let (pair, n) = match s.model {
                    Some(ModelKind::Normal) => (normal_belief(s.x.unwrap_or(0.0), theta, omega)?, 1),
                    _ => {
                        let n = s.n.unwrap_or(0);
                        (bernoulli_belief(n, s.successes.unwrap_or(0), theta, omega)?, n)
                    }
                };
                rows.push(self.row("belief", theta, omega, n, pair.belief, 0.0, 0));
                rows.push(self.row("plausibility", theta, omega, n, pair.plausibility, 0.0, 0));
            }
        }
        Ok(rows)
    }

    fn family(&self) -> PrsFamily {
        PrsFamily {
            shape: self.spec.family.unwrap_or(PrsShape::Interval),
            dim: self.spec.dim.unwrap_or(1),
            omega: 0.0,
        }
    }

    fn credibility(&self) -> Result<Vec<ResultRow>> {
        let s = self.spec;
        let fam = self.family();
        let curve = credibility_curve(&fam, &s.grid, s.alpha, &s.mc, self.root().named("credibility"))?;
        Ok(curve
            .iter()
            .map(|e| self.row("phi", e.omega, e.alpha, fam.dim, e.phi_hat, e.std_err, e.outer_draws))
            .collect())
    }

    fn calibrate(&mut self) -> Result<Vec<ResultRow>> {
        let fam = self.family();
        let mut rows = Vec::with_capacity(2 * self.spec.grid.len());
        for &alpha in &self.spec.grid {
            let res = self.solve(fam, alpha)?;
            let f = res.final_phi;
            rows.push(self.row("omega_star", alpha, alpha, fam.dim, res.omega_star, 0.0, res.trajectory.len()));
            rows.push(self.row("phi", alpha, alpha, fam.dim, f.phi_hat, f.std_err, f.outer_draws));
        }
        Ok(rows)
    }

    fn solve(&mut self, family: PrsFamily, alpha: f64) -> Result<CalibrationResult> {
        let s = self.spec;
        let res = calibrate_cached(&family, alpha, &s.sa, s.seed, s.cache_dir.as_deref())?.into_converged()?;
        self.calibrations.push(CalibrationNote {
            family: family.shape.name().to_string(),
            n: family.dim,
            alpha,
            omega_star: res.omega_star,
            final_phi: res.final_phi.phi_hat,
            final_phi_se: res.final_phi.std_err,
        });
        Ok(res)
    }

    fn mb_omega(&mut self, shape: PrsShape, n: usize) -> Result<f64> {
        if let Some(&w) = self.calibrated.get(&(shape, n)) {
            return Ok(w);
        }
        let family = PrsFamily { shape, dim: n, omega: 0.0 };
        let w = self.solve(family, self.spec.alpha)?.omega_star;
        self.calibrated.insert((shape, n), w);
        Ok(w)
    }

    fn null(&self, stat: Statistic, n: usize) -> Result<NullDistribution> {
        let s = self.spec;
        let stream = self.root().named("null").named(stat.name()).child(n as u64);
        match &s.cache_dir {
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                NullCache::new(dir).get(stat, n, s.null_reps, stream)
            }
            None => NullDistribution::simulate(stat, n, s.null_reps, stream),
        }
    }

    fn arms(&mut self, point: &Point, shape: PrsShape) -> Result<Arms> {
        let s = self.spec;
        let mut arms = Arms { omega: None, nulls: Vec::new(), kl_pool: None, box_pool: None };
        for t in &s.tests {
            arms.nulls.push(match t {
                TestKind::Mb => None,
                TestKind::Baseline(stat) => Some(self.null(*stat, point.n)?),
            });
        }
        if s.tests.contains(&TestKind::Mb) {
            arms.omega = Some(self.mb_omega(shape, point.n)?);
            if s.shared_pool {
                let mut rng = self.root().named("pool").child(point.value.to_bits()).rng();
                match shape {
                    PrsShape::KlBall => arms.kl_pool = Some(KlPool::sample(point.n, s.mc.inner, &mut rng)),
                    _ => arms.box_pool = Some(BoxPool::sample(point.n, s.mc.inner, &mut rng)),
                }
            }
        }
        Ok(arms)
    }

    /// Rejection rates of every requested test at each grid point.
    fn rejection_study(&mut self, points: Vec<Point>) -> Result<Vec<ResultRow>> {
        let s = self.spec;
        let mut rows = Vec::with_capacity(points.len() * s.tests.len());
        for point in &points {
            let homogeneity = matches!(point.params, ModelParams::Homogeneity { .. });
            let shape = if homogeneity { PrsShape::KlBall } else { PrsShape::BetaBoxHier };
            let arms = self.arms(point, shape)?;
            let data_root = self.root().named("data").child(point.value.to_bits());
            let mb_root = self.root().named("mb").child(point.value.to_bits());
            let decisions: Vec<Vec<bool>> = (0..s.replications)
                .into_par_iter()
                .map(|r| {
                    let data = generate_data(&point.params, point.n, &mut data_root.child(r as u64).rng())?;
                    let x = match data {
                        ObservedData::Homogeneity { times } => times,
                        ObservedData::OneSample { values } => values,
                        _ => unreachable!("rejection studies use homogeneity or one-sample data"),
                    };
                    let mut rng = mb_root.child(r as u64).rng();
                    s.tests
                        .iter()
                        .zip(&arms.nulls)
                        .map(|(t, null)| match (t, null) {
                            (TestKind::Mb, _) => {
                                let omega = arms.omega.unwrap_or(0.0);
                                let pair = match (homogeneity, &arms.kl_pool, &arms.box_pool) {
                                    (true, Some(pool), _) => homogeneity_plausibility_pooled(&x, omega, pool)?,
                                    (true, None, _) => homogeneity_plausibility(&x, omega, &s.mc, &mut rng)?,
                                    (false, _, Some(pool)) => onesample_plausibility_pooled(&x, &s.null, omega, pool)?,
                                    (false, _, None) => onesample_plausibility(&x, &s.null, omega, &s.mc, &mut rng)?,
                                };
                                Ok(pair.plausibility < s.alpha)
                            }
                            (TestKind::Baseline(_), Some(null)) => Ok(null.test(&x, &s.null, s.alpha)?.reject),
                            (TestKind::Baseline(_), None) => unreachable!("baseline without a null"),
                        })
                        .collect::<Result<Vec<bool>>>()
                })
                .collect::<Result<_>>()?;
            for (k, t) in s.tests.iter().enumerate() {
                let hits = decisions.iter().filter(|d| d[k]).count();
                let rate = hits as f64 / s.replications as f64;
                rows.push(self.row(
                    t.name(),
                    point.value,
                    s.alpha,
                    point.n,
                    rate,
                    binomial_se(rate, s.replications),
                    s.replications,
                ));
            }
        }
        Ok(rows)
    }
}
