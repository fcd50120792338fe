use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use doq_core::backtest::{
    emit_report, load_market_quotes, load_price_series, run_backtest, BacktestConfig, ClockOrigin,
};
use doq_core::estimate::{rolling_estimates, Formula, Method, RollingConfig, DAILY_DT};
use doq_core::fmt::{f17, f17_opt};
use doq_core::path_sim::{
    simulate_bm_path, simulate_do_path, simulate_fbm_path, simulate_martingale_path, simulate_modified_do_path,
    simulate_stock_path,
};
use doq_core::pricing::{do_call_pde, mc_call, model_call, CallInputs, McConfig, OptionSpec, PdeGrid, PriceQuote};
use doq_core::quad_var::{qv_convergence_harness, QvHarnessConfig};
use doq_core::{Error, MScheme, ModelKind, ModelParams, TimeGrid};

#[derive(Parser)]
#[command(name = "doq", version, about = "Dobrić-Ojeda process simulation, estimation and option pricing")]
struct Cli {
    /// Base seed for every random draw
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Use the estimator formulas exactly as printed instead of the limit-consistent ones
    #[arg(long, global = true)]
    paper_literal: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one sample path and write it as `t,value` CSV
    Simulate(SimulateArgs),
    /// Check convergence of the sample quadratic variation of V_H
    QvCheck(QvCheckArgs),
    /// Rolling Hurst and volatility estimates from a `date,close` CSV
    Estimate(EstimateArgs),
    /// Price a European call (closed form, or Monte Carlo with --paths) as JSON
    Price(PriceArgs),
    /// Price a European call under the DO model by finite differences
    PdePrice(PdePriceArgs),
    /// Rolling three-model valuation over historical closes
    Backtest(BacktestArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Process {
    M,
    V,
    VEps,
    Fbm,
    Bm,
    Stock,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Bs,
    Fbm,
    Do,
}

impl From<Model> for ModelKind {
    fn from(m: Model) -> Self {
        match m {
            Model::Bs => ModelKind::BlackScholes,
            Model::Fbm => ModelKind::FractionalBm,
            Model::Do => ModelKind::DobricOjeda,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    Exact,
    Euler,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimateMethod {
    Ergodic,
    Qv,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum Clock {
    WindowStart,
    Valuation,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    process: Process,
    #[arg(long, default_value_t = 0.5)]
    h: f64,
    /// Number of time steps
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    t_end: f64,
    /// Drift cut-on time for v-eps and the DO stock
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    #[arg(long, value_enum, default_value_t = Scheme::Exact)]
    scheme: Scheme,
    /// Driving model for `--process stock`
    #[arg(long, value_enum, default_value_t = Model::Do)]
    model: Model,
    #[arg(long, default_value_t = 0.05)]
    mu: f64,
    #[arg(long, default_value_t = 0.2)]
    sigma: f64,
    #[arg(long, default_value_t = 100.0)]
    s0: f64,
    /// Path index within the seed's stream family
    #[arg(long, default_value_t = 0)]
    path_index: u64,
    /// Output file (stdout when omitted)
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct QvCheckArgs {
    #[arg(long)]
    h: f64,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [64usize, 256, 1024])]
    n_list: Vec<usize>,
    #[arg(long, default_value_t = 0.0)]
    t0: f64,
    #[arg(long, default_value_t = 1.0)]
    t_end: f64,
    #[arg(long, default_value_t = 50)]
    seeds: usize,
    /// Largest partition size allowed
    #[arg(long, default_value_t = 1 << 22)]
    max_steps: usize,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    csv: PathBuf,
    #[arg(long, value_enum, default_value_t = EstimateMethod::Both)]
    method: EstimateMethod,
    #[arg(long, default_value_t = 62)]
    window: usize,
    /// Sampling interval in years
    #[arg(long, default_value_t = DAILY_DT)]
    dt: f64,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MarketArgs {
    #[arg(long)]
    s: f64,
    #[arg(long)]
    k: f64,
    #[arg(long, default_value_t = 0.0)]
    r: f64,
    #[arg(long)]
    sigma: f64,
    #[arg(long, default_value_t = 0.5)]
    h: f64,
    /// Valuation time in years
    #[arg(long, default_value_t = 0.0)]
    t: f64,
    /// Expiry in years
    #[arg(long = "T", alias = "t-exp")]
    t_exp: f64,
}

impl MarketArgs {
    fn inputs(&self) -> CallInputs {
        CallInputs { s: self.s, k: self.k, r: self.r, sigma: self.sigma, h: self.h, t: self.t, t_exp: self.t_exp }
    }
}

#[derive(Args)]
struct PriceArgs {
    #[arg(long, value_enum)]
    model: Model,
    #[command(flatten)]
    market: MarketArgs,
    /// Drift cut-on time of the modified process (Monte Carlo only)
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    /// Monte Carlo path count; closed form when omitted
    #[arg(long)]
    paths: Option<usize>,
}

#[derive(Args)]
struct PdePriceArgs {
    #[command(flatten)]
    market: MarketArgs,
    #[arg(long, default_value_t = 400)]
    x_nodes: usize,
    #[arg(long, default_value_t = 400)]
    t_steps: usize,
    /// Relative tolerance of the half-grid refinement check
    #[arg(long, default_value_t = 1e-2)]
    refine_tol: f64,
}

#[derive(Args)]
struct BacktestArgs {
    #[arg(long)]
    csv: PathBuf,
    #[arg(long, default_value = "UNKNOWN")]
    symbol: String,
    #[arg(long)]
    strike: f64,
    /// Expiry date, YYYY-MM-DD
    #[arg(long)]
    expiry: NaiveDate,
    #[arg(long)]
    r: f64,
    #[arg(long, default_value_t = 62)]
    window: usize,
    /// Observed option prices as a `date,price` CSV
    #[arg(long)]
    quotes: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Clock::WindowStart)]
    clock: Clock,
    #[arg(long, default_value = "report")]
    out_dir: PathBuf,
    /// Skip the SVG chart
    #[arg(long)]
    no_svg: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}

/// Applies `DOQ_MAX_THREADS` to the global thread pool.
fn configure_threads() -> Result<(), Error> {
    let Ok(raw) = std::env::var("DOQ_MAX_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::Validation(format!("DOQ_MAX_THREADS must be a positive integer, got `{raw}`")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Validation(format!("cannot size thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn formula(cli: &Cli) -> Formula {
    if cli.paper_literal {
        Formula::Literal
    } else {
        Formula::Corrected
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: &Cli) -> Result<(), Error> {
    match &cli.command {
        Command::Simulate(a) => simulate(cli, a),
        Command::QvCheck(a) => qv_check(cli, a),
        Command::Estimate(a) => estimate(cli, a),
        Command::Price(a) => price(cli, a),
        Command::PdePrice(a) => pde_price(a),
        Command::Backtest(a) => backtest(cli, a),
    }
}

fn simulate(cli: &Cli, a: &SimulateArgs) -> Result<(), Error> {
    let grid = TimeGrid::unit(a.t_end, a.n)?;
    let seed = doq_core::PathSeed::new(cli.seed, a.path_index);
    let scheme = match a.scheme {
        Scheme::Exact => MScheme::Exact,
        Scheme::Euler => MScheme::PaperEuler,
    };
    let path = match a.process {
        Process::M => simulate_martingale_path(&grid, a.h, seed, scheme)?,
        Process::V => simulate_do_path(&grid, a.h, seed, scheme)?,
        Process::VEps => simulate_modified_do_path(&grid, a.h, a.eps, seed)?,
        Process::Fbm => simulate_fbm_path(&grid, a.h, seed)?,
        Process::Bm => simulate_bm_path(&grid, seed)?,
        Process::Stock => {
            let params =
                ModelParams { mu: a.mu, sigma: a.sigma, h: a.h, eps: a.eps, s0: a.s0, r: 0.0, model: a.model.into() };
            simulate_stock_path(&params, &grid, seed)?
        }
    };
    let mut out = open_output(a.output.as_deref())?;
    path.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

fn qv_check(cli: &Cli, a: &QvCheckArgs) -> Result<(), Error> {
    let cfg = QvHarnessConfig {
        h: a.h,
        t0: a.t0,
        t_end: a.t_end,
        n_list: a.n_list.clone(),
        delta: a.delta,
        n_seeds: a.seeds,
        seed: cli.seed,
        max_steps: a.max_steps,
        ..QvHarnessConfig::default()
    };
    let report = qv_convergence_harness(&cfg)?;
    let mut out = open_output(a.output.as_deref())?;
    report.write_csv(&mut out)?;
    out.flush()?;
    if let Some(slope) = report.log_log_slope {
        eprintln!("log-log slope of l2 error vs n: {slope:.4}");
    }
    Ok(())
}

fn estimate(cli: &Cli, a: &EstimateArgs) -> Result<(), Error> {
    let series = load_price_series(&a.csv, "")?;
    let methods: &[Method] = match a.method {
        EstimateMethod::Ergodic => &[Method::ErgodicRatio],
        EstimateMethod::Qv => &[Method::QvRatio],
        EstimateMethod::Both => &[Method::ErgodicRatio, Method::QvRatio],
    };
    let mut out = open_output(a.output.as_deref())?;
    writeln!(out, "date,method,mu_hat,h_hat,sigma_hat,clamped")?;
    for &method in methods {
        let cfg = RollingConfig { formula: formula(cli), dt: a.dt, ..RollingConfig::new(a.window, method) };
        for d in rolling_estimates(&series, &cfg)? {
            let e = d.estimate;
            writeln!(
                out,
                "{},{},{},{},{},{}",
                d.date,
                e.method_label(),
                f17_opt(e.mu_hat),
                f17(e.h_hat),
                f17(e.sigma_hat),
                e.clamped
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

fn quote_json(q: &PriceQuote, method: &str, extra: serde_json::Value) -> serde_json::Value {
    let mut v = json!({
        "model": q.model.tag(),
        "method": method,
        "value": q.value,
        "d1": q.d1,
        "stderr": q.stderr,
    });
    if let (Some(obj), serde_json::Value::Object(more)) = (v.as_object_mut(), extra) {
        obj.extend(more);
    }
    v
}

fn print_json(v: &serde_json::Value) -> Result<(), Error> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v).map_err(io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

fn price(cli: &Cli, a: &PriceArgs) -> Result<(), Error> {
    let inp = a.market.inputs();
    let model: ModelKind = a.model.into();
    let v = match a.paths {
        None => quote_json(&model_call(model, &inp)?, "closed_form", json!({})),
        Some(n_paths) => {
            inp.validate()?;
            let params = ModelParams {
                mu: inp.r,
                sigma: inp.sigma,
                h: if model == ModelKind::BlackScholes { 0.5 } else { inp.h },
                eps: a.eps,
                s0: inp.s,
                r: inp.r,
                model,
            };
            let spec = OptionSpec::call(inp.k, inp.t_exp)?;
            let q = mc_call(&params, &spec, inp.t, &McConfig::new(n_paths, cli.seed))?;
            quote_json(&q, "monte_carlo", json!({ "paths": n_paths, "seed": cli.seed, "eps": a.eps }))
        }
    };
    print_json(&v)
}

fn pde_price(a: &PdePriceArgs) -> Result<(), Error> {
    let grid = PdeGrid { x_nodes: a.x_nodes, t_steps: a.t_steps, refine_tol: a.refine_tol };
    let q = do_call_pde(&a.market.inputs(), grid)?;
    print_json(&quote_json(&q, "pde", json!({ "x_nodes": a.x_nodes, "t_steps": a.t_steps })))
}

fn backtest(cli: &Cli, a: &BacktestArgs) -> Result<(), Error> {
    let series = load_price_series(&a.csv, &a.symbol)?;
    let quotes = a.quotes.as_deref().map(load_market_quotes).transpose()?;
    let cfg = BacktestConfig {
        window: a.window,
        formula: formula(cli),
        clock: match a.clock {
            Clock::WindowStart => ClockOrigin::WindowStart,
            Clock::Valuation => ClockOrigin::Valuation,
        },
        ..BacktestConfig::new(a.strike, a.expiry, a.r)
    };
    let rows = run_backtest(&series, &cfg, quotes.as_ref())?;
    let variant = if cli.paper_literal { "literal" } else { "corrected" };
    let files = emit_report(&rows, &a.out_dir, variant, !a.no_svg)?;
    eprintln!("{} rows written to {}", rows.len(), files.backtest_csv.display());
    Ok(())
}
