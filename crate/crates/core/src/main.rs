use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use weakbelief::baselines::{NullCache, Statistic};
use weakbelief::harness::{self, ExperimentKind, ExperimentSpec, PlotKind};
use weakbelief::models::{homogeneity_test, onesample_test, Cdf};
use weakbelief::prs::PrsFamily;
use weakbelief::{Error, RngStream};

#[derive(Parser)]
#[command(name = "weakbelief", version, about = "Inference with weak beliefs: calibration, belief functions and power studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the maximal-belief index ω(α) of a PRS family.
    Calibrate(Common),
    /// Belief and plausibility curves for the normal or Bernoulli model.
    Belief(Common),
    /// Credibility function φ̂_α(ω) on a grid of ω.
    Credibility(Common),
    /// MB and LR tests of equal exponential rates on a data file.
    TestHomogeneity(DataTest),
    /// MB and EDF goodness-of-fit tests of F = F0 on a data file.
    TestOnesample(DataTest),
    /// Power study (homogeneity or one-sample).
    Power(Common),
    /// Type-I error study.
    Size(Common),
    /// Render a result CSV as SVG.
    Plot {
        csv: PathBuf,
        /// auto, belief, credibility, calibration, power or size
        #[arg(long, default_value = "auto")]
        kind: String,
        /// Output file (default: the CSV path with an .svg extension)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` experiment config
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra `key=value` settings, applied after the config file
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Replications of a power or size study
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    mc_inner: Option<usize>,
    #[arg(long)]
    mc_outer: Option<usize>,
    /// Output directory
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Do not read or write `<out>/cache`
    #[arg(long)]
    no_cache: bool,
}

#[derive(Args)]
struct DataTest {
    /// Numbers separated by whitespace, commas or newlines; `#` comments
    data: PathBuf,
    /// Null distribution of the one-sample test
    #[arg(long, default_value = "uniform(0,1)")]
    null: String,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    mc_inner: usize,
    /// Monte Carlo size of the baseline null distributions
    #[arg(long, default_value_t = 10_000)]
    null_reps: usize,
    /// Calibration budget: desk or default
    #[arg(long, default_value = "desk")]
    sa_preset: String,
    /// Cache directory for calibrations and null distributions
    #[arg(long, default_value = "results/cache")]
    cache: PathBuf,
    #[arg(long)]
    threads: Option<usize>,
}

fn build_spec(c: &Common, default_kind: ExperimentKind, allowed: &[ExperimentKind]) -> weakbelief::Result<ExperimentSpec> {
    let mut spec = match &c.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let has_kind = text.lines().any(|l| l.split('#').next().unwrap_or("").trim_start().starts_with("experiment"));
            if has_kind {
                ExperimentSpec::parse(&text)?
            } else {
                ExperimentSpec::parse(&format!("experiment = {default_kind}\n{text}"))?
            }
        }
        None => ExperimentSpec::new(default_kind),
    };
    let mut bad = Vec::new();
    for s in &c.sets {
        match s.split_once('=') {
            Some((k, v)) => {
                if let Err(e) = spec.set(k.trim(), v) {
                    bad.push(e);
                }
            }
            None => bad.push(format!("--set {s}: expected KEY=VALUE")),
        }
    }
    if let Some(v) = c.seed {
        spec.seed = v;
    }
    if let Some(v) = c.alpha {
        spec.alpha = v;
    }
    if let Some(v) = c.reps {
        spec.replications = v;
    }
    if let Some(v) = c.mc_inner {
        spec.mc.inner = v;
    }
    if let Some(v) = c.mc_outer {
        spec.mc.outer = v;
    }
    if !allowed.contains(&spec.experiment) {
        bad.push(format!("experiment: `{}` cannot run under this subcommand", spec.experiment));
    }
    if !bad.is_empty() {
        return Err(Error::Validation(bad));
    }
    if spec.cache_dir.is_none() && !c.no_cache {
        spec.cache_dir = Some(c.out.join("cache"));
    }
    Ok(spec)
}

fn run_experiment(c: &Common, default_kind: ExperimentKind, allowed: &[ExperimentKind]) -> weakbelief::Result<()> {
    let spec = build_spec(c, default_kind, allowed)?;
    let m = harness::run_to_dir(&spec, &c.out, c.threads)?;
    println!(
        "{}: {} rows in {:.1}s on {} threads -> {}",
        spec.id,
        m.rows,
        m.wall_clock_seconds,
        m.threads,
        c.out.join(&m.csv).display()
    );
    for cal in &m.calibrations {
        println!(
            "  calibrated {} n={} alpha={}: omega*={:.6} phi={:.4}±{:.4}",
            cal.family, cal.n, cal.alpha, cal.omega_star, cal.final_phi, cal.final_phi_se
        );
    }
    Ok(())
}

fn read_numbers(path: &Path) -> weakbelief::Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("");
        for tok in body.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            out.push(tok.parse().map_err(|_| Error::Parse { line: i + 1, msg: format!("not a number: `{tok}`") })?);
        }
    }
    Ok(out)
}

fn data_test(d: &DataTest, homogeneity: bool) -> weakbelief::Result<()> {
    let x = read_numbers(&d.data)?;
    let mut spec = ExperimentSpec::new(ExperimentKind::Calibrate);
    spec.set("sa.preset", &d.sa_preset).map_err(|e| Error::Validation(vec![e]))?;
    let mc = weakbelief::MonteCarloParams::new(weakbelief::MonteCarloParams::MIN_OUTER, d.mc_inner);
    let root = RngStream::new(d.seed, 0).named("data-test");
    std::fs::create_dir_all(&d.cache)?;
    let cache = NullCache::new(&d.cache);
    let null = Cdf::parse(&d.null)?;
    harness::run_threads(d.threads, || {
        let n = x.len();
        let family = if homogeneity { PrsFamily::kl_ball(n, 0.0) } else { PrsFamily::beta_box_hier(n, 0.0) };
        let calib = harness::calibrate_cached(&family, d.alpha, &spec.sa, d.seed, Some(&d.cache))?.into_converged()?;
        let mut rng = root.named("mb").rng();
        let mb = if homogeneity {
            homogeneity_test(&x, d.alpha, &calib, &mc, &mut rng)?
        } else {
            onesample_test(&x, &null, d.alpha, &calib, &mc, &mut rng)?
        };
        println!("n = {n}, alpha = {}", d.alpha);
        println!(
            "mb   omega*={:.6}  pl={:.4}±{:.4}  {}",
            mb.omega,
            mb.evidence.plausibility,
            mb.evidence.plausibility_se,
            verdict(mb.reject)
        );
        let stats: &[Statistic] = if homogeneity { &[Statistic::Lr] } else { &[Statistic::Ks, Statistic::Ad, Statistic::Cvm] };
        for &stat in stats {
            let stream = RngStream::new(d.seed, 0).named("null").named(stat.name()).child(n as u64);
            let t = cache.get(stat, n, d.null_reps, stream)?.test(&x, &null, d.alpha)?;
            println!(
                "{:<4} stat={:.6}  crit={:.6}  p={:.4}  {}",
                stat.name(),
                t.statistic,
                t.critical_value,
                t.p_value,
                verdict(t.reject)
            );
        }
        Ok(())
    })
}

fn verdict(reject: bool) -> &'static str {
    if reject {
        "reject"
    } else {
        "do not reject"
    }
}

fn main() -> ExitCode {
    use ExperimentKind as K;
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Calibrate(c) => run_experiment(c, K::Calibrate, &[K::Calibrate]),
        Command::Belief(c) => run_experiment(c, K::BeliefCurve, &[K::BeliefCurve]),
        Command::Credibility(c) => run_experiment(c, K::CredibilityCurve, &[K::CredibilityCurve]),
        Command::Power(c) => run_experiment(c, K::HomogeneityPower, &[K::HomogeneityPower, K::OnesamplePower]),
        Command::Size(c) => run_experiment(c, K::Type1Size, &[K::Type1Size]),
        Command::TestHomogeneity(d) => data_test(d, true),
        Command::TestOnesample(d) => data_test(d, false),
        Command::Plot { csv, kind, out } => kind
            .parse::<PlotKind>()
            .map_err(|e| Error::Validation(vec![e]))
            .and_then(|k| {
                let svg = out.clone().unwrap_or_else(|| csv.with_extension("svg"));
                harness::plot(csv, k, &svg)?;
                println!("wrote {}", svg.display());
                Ok(())
            }),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Validation(_) | Error::Config(_) | Error::Parse { .. } | Error::Domain(_) => 2,
                Error::Calibration(_) => 3,
                _ => 1,
            })
        }
    }
}
