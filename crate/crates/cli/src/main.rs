use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use msp_core::estimators::{EstimatorOptions, Method};
use msp_core::experiments::{
    cross_validate, lambda_grid, lambda_robustness, run_benchmark, trace_path, track_index, BenchConfig, MspLambdaPolicy, SparsityOptions,
    WindowSpec, DEFAULT_MSP_FRACTION,
};
use msp_core::simgen::{gen_prices, gen_scenario, PriceConfig};
use msp_core::{destandardize, io, standardize, Dataset, Scenario, ScenarioConfig};

#[derive(Parser, Debug)]
#[command(name = "msp", version, about = "Sparse regression experiments")]
struct Cli {
    /// Output directory; created if missing.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
enum Command {
    /// Draw one dataset from a scenario.
    Simulate(ScenarioArgs),
    /// Coefficient paths over a penalty grid.
    Path(PathArgs),
    /// Replicated benchmark of every estimator.
    Bench(BenchArgs),
    /// K-fold cross-validation of one estimator.
    Cv(CvArgs),
    /// MSP estimation error across fixed penalty values.
    Robustness(RobustnessArgs),
    /// Rolling-window sparse index tracking.
    Track(TrackArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
struct ScenarioArgs {
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    scenario: u8,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 50)]
    p: usize,
    #[arg(long, default_value_t = 4)]
    q: usize,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
}

impl ScenarioArgs {
    fn config(&self) -> Result<ScenarioConfig> {
        let cfg = ScenarioConfig {
            q: self.q,
            sigma: self.sigma,
            ..ScenarioConfig::new(Scenario::from_number(self.scenario)?, self.n, self.p, self.seed)
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Debug, Serialize)]
struct PathArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Read a dataset csv (column `y` plus predictors) instead of simulating.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value = "msp")]
    method: Method,
    #[arg(long, default_value_t = 100)]
    grid_size: usize,
    /// Fit this single penalty instead of a grid.
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct BenchArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, default_value_t = 100)]
    grid_size: usize,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    /// Fixed MSP penalty as a fraction of lambda_max; `cv` cross-validates it.
    #[arg(long, default_value_t = DEFAULT_MSP_FRACTION.to_string())]
    msp_lambda: String,
    /// Comma-separated subset of methods; all by default.
    #[arg(long, value_delimiter = ',')]
    method: Vec<Method>,
}

#[derive(Args, Debug, Serialize)]
struct CvArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value = "msp")]
    method: Method,
    #[arg(long, default_value_t = 100)]
    grid_size: usize,
    #[arg(long, default_value_t = 10)]
    folds: usize,
}

#[derive(Args, Debug, Serialize)]
struct RobustnessArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    /// Penalty values, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,1.5,2,2.5,3,3.5,4,4.5")]
    lambda: Vec<f64>,
}

#[derive(Args, Debug, Serialize)]
struct TrackArgs {
    /// Price csv: `date,index,<tickers...>`. Synthetic prices are used when absent.
    #[arg(long)]
    prices: Option<PathBuf>,
    #[arg(long, default_value = "msp")]
    method: Method,
    #[arg(long, default_value_t = 20)]
    k: usize,
    #[arg(long, default_value_t = 100)]
    train: usize,
    #[arg(long, default_value_t = 20)]
    test: usize,
    #[arg(long, default_value_t = 20)]
    stride: usize,
    #[arg(long)]
    windows: Option<usize>,
    #[arg(long, default_value_t = 100)]
    grid_size: usize,
    /// Synthetic prices: trading days, stocks, planted index members and
    /// multiplicative index noise.
    #[arg(long, default_value_t = 480)]
    days: usize,
    #[arg(long, default_value_t = 100)]
    stocks: usize,
    #[arg(long, default_value_t = 5)]
    planted: usize,
    #[arg(long, default_value_t = 0.0)]
    index_noise: f64,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    #[serde(flatten)]
    command: &'a Command,
    outputs: Vec<String>,
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    let out = cli.out.as_path();
    let outputs = match &cli.command {
        Command::Simulate(a) => simulate(a, out)?,
        Command::Path(a) => path(a, out)?,
        Command::Bench(a) => bench(a, out)?,
        Command::Cv(a) => cv(a, out)?,
        Command::Robustness(a) => robustness(a, out)?,
        Command::Track(a) => track(a, out)?,
    };
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: &cli.command,
        outputs,
    };
    let file = create(out, "run.json")?;
    serde_json::to_writer_pretty(file, &manifest)?;
    Ok(())
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn load(data: Option<&Path>, scenario: &ScenarioArgs) -> Result<Dataset> {
    match data {
        Some(p) => {
            let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
            Ok(io::read_dataset(f).with_context(|| format!("reading {}", p.display()))?)
        }
        None => Ok(gen_scenario(&scenario.config()?)?),
    }
}

fn simulate(a: &ScenarioArgs, out: &Path) -> Result<Vec<String>> {
    let data = gen_scenario(&a.config()?)?;
    io::write_dataset(&data, create(out, "data.csv")?)?;
    let truth = data.truth().expect("simulated data carries truth");
    io::write_truth(truth, data.names(), create(out, "truth.csv")?)?;
    Ok(vec!["data.csv".into(), "truth.csv".into()])
}

fn path(a: &PathArgs, out: &Path) -> Result<Vec<String>> {
    let data = load(a.data.as_deref(), &a.scenario)?;
    let design = standardize(&data, false)?;
    let y = design.response().to_owned();
    let grid = match a.lambda {
        Some(l) if l >= 0.0 => vec![l],
        Some(l) => bail!("--lambda must be nonnegative, got {l}"),
        None => lambda_grid(&design, y.view(), a.grid_size)?,
    };
    let mut result = trace_path(&design, y.view(), a.method, &grid, &EstimatorOptions::default())?;
    for pt in &mut result.points {
        pt.coefs = destandardize(&pt.coefs, &design)?;
    }
    let unconverged = result.points.iter().filter(|p| !p.converged).count();
    if unconverged > 0 {
        log::warn!("{unconverged} of {} grid points hit an iteration cap", result.points.len());
    }
    let support = data.truth().map(|t| t.support().to_vec()).unwrap_or_default();
    io::write_path(&result, data.names(), &support, create(out, "path.csv")?)?;
    Ok(vec!["path.csv".into()])
}

fn bench(a: &BenchArgs, out: &Path) -> Result<Vec<String>> {
    let msp_policy = match a.msp_lambda.as_str() {
        "cv" => MspLambdaPolicy::CrossValidated,
        s => MspLambdaPolicy::FractionOfMax(
            s.parse()
                .with_context(|| format!("--msp-lambda: `{s}` is neither `cv` nor a number"))?,
        ),
    };
    let cfg = BenchConfig {
        methods: if a.method.is_empty() {
            Method::ALL.to_vec()
        } else {
            a.method.clone()
        },
        reps: a.reps,
        grid_size: a.grid_size,
        folds: a.folds,
        msp_policy,
        ..BenchConfig::new(a.scenario.config()?)
    };
    let result = run_benchmark(&cfg)?;
    io::write_bench_table(&result, create(out, "bench.csv")?)?;

    let mut w = csv::Writer::from_writer(create(out, "replications.csv")?);
    w.write_record(["method", "rep", "l2", "l1", "nz", "fpr", "tpr", "sign_consistent"])?;
    for row in &result.rows {
        for (rep, r) in &row.reports {
            w.serialize((row.method.name(), rep, r.l2_err, r.l1_err, r.nz, r.fpr, r.tpr, r.sign_consistent))?;
        }
    }
    w.flush()?;
    Ok(vec!["bench.csv".into(), "replications.csv".into()])
}

fn cv(a: &CvArgs, out: &Path) -> Result<Vec<String>> {
    let data = load(a.data.as_deref(), &a.scenario)?;
    let design = standardize(&data, false)?;
    let y = design.response().to_owned();
    let grid = lambda_grid(&design, y.view(), a.grid_size)?;
    let opts = EstimatorOptions::default();
    let res = cross_validate(&design, y.view(), a.method, &grid, a.folds, a.scenario.seed, &opts)?;

    let mut w = csv::Writer::from_writer(create(out, "cv.csv")?);
    w.write_record(["lambda", "error", "selected"])?;
    for (i, (&l, &e)) in grid.iter().zip(&res.errors).enumerate() {
        w.serialize((l, e, i == res.index))?;
    }
    w.flush()?;

    let fit = a.method.fit(&design, y.view(), res.lambda, &opts)?;
    let coefs = destandardize(fit.coefs(), &design)?;
    let mut w = csv::Writer::from_writer(create(out, "coefficients.csv")?);
    w.write_record(["variable", "value"])?;
    for (name, v) in data.names().iter().zip(coefs.values()) {
        w.serialize((name, v))?;
    }
    w.flush()?;
    println!(
        "{}: lambda {} (grid index {}), {} nonzero",
        a.method,
        res.lambda,
        res.index,
        coefs.nz()
    );
    Ok(vec!["cv.csv".into(), "coefficients.csv".into()])
}

fn robustness(a: &RobustnessArgs, out: &Path) -> Result<Vec<String>> {
    let pts = lambda_robustness(&a.scenario.config()?, &a.lambda, a.reps, &EstimatorOptions::default())?;
    let mut w = csv::Writer::from_writer(create(out, "robustness.csv")?);
    w.write_record(["lambda", "l2_mean", "l2_sd"])?;
    for pt in &pts {
        w.serialize((pt.lambda, pt.l2.mean, pt.l2.sd))?;
    }
    w.flush()?;
    Ok(vec!["robustness.csv".into()])
}

fn track(a: &TrackArgs, out: &Path) -> Result<Vec<String>> {
    let mut outputs = Vec::new();
    let table = match &a.prices {
        Some(p) => {
            let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
            io::read_prices(f).with_context(|| format!("reading {}", p.display()))?
        }
        None => {
            let (table, _) = gen_prices(&PriceConfig {
                days: a.days,
                stocks: a.stocks,
                planted: a.planted,
                index_noise: a.index_noise,
                seed: a.seed,
            })?;
            io::write_prices(&table, create(out, "prices.csv")?)?;
            outputs.push("prices.csv".into());
            table
        }
    };
    let spec = WindowSpec {
        train: a.train,
        test: a.test,
        stride: a.stride,
        windows: a.windows,
    };
    let opts = SparsityOptions {
        grid_size: a.grid_size,
        ..SparsityOptions::default()
    };
    let res = track_index(&table, &spec, a.method, a.k, &opts)?;

    let mut w = csv::Writer::from_writer(create(out, "windows.csv")?);
    w.write_record(["window", "train_start", "test_end", "lambda", "nz", "fitted_te", "predicted_te"])?;
    for (i, win) in res.windows.iter().enumerate() {
        let start = table.dates()[win.start].to_string();
        let end = table.dates()[win.start + a.train + a.test - 1].to_string();
        w.serialize((i + 1, start, end, win.lambda, win.nz, win.fitted_te, win.predicted_te))?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_writer(create(out, "weights.csv")?);
    let mut header = vec!["window".to_string()];
    header.extend(table.tickers().iter().cloned());
    w.write_record(&header)?;
    for (i, win) in res.windows.iter().enumerate() {
        let mut rec = vec![(i + 1).to_string()];
        rec.extend(win.weights.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_writer(create(out, "summary.csv")?);
    w.write_record(["measure", "mean", "sd"])?;
    w.serialize(("fitted_te", res.fitted.mean, res.fitted.sd))?;
    w.serialize(("predicted_te", res.predicted.mean, res.predicted.sd))?;
    w.flush()?;
    println!("{} windows, predicted tracking error {}", res.windows.len(), res.predicted.cell());
    outputs.extend(["windows.csv".into(), "weights.csv".into(), "summary.csv".into()]);
    Ok(outputs)
}
