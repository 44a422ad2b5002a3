//! `glcint`: interference prediction, simulation and BPP checks for
//! scenario files.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numeric failure (divergence,
//! non-existent MGF), 4 I/O.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use glcint::bpp::{check_bpp_condition_with, DEFAULT_GAP_TOL};
use glcint::montecarlo::{check_realization_count, realization_matrix, EmpiricalStats};
use glcint::predict::{mean_interference_with, mgf_interference_with, Method, PredictOptions, Scenario};
use glcint::scenario::{load_scenario_file, parse_time_grid, RunSpec};
use glcint::{Error, Execution};

#[derive(Parser)]
#[command(name = "glcint", version, about = "Interference prediction for linearly mobile nodes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Predicted mean, variance and MGF on a time grid.
    Predict(PredictArgs),
    /// Monte Carlo estimates on a time grid.
    Simulate(SimulateArgs),
    /// Test the Gaussian BPP approximation conditions.
    BppCheck(BppArgs),
    /// Parse and validate a scenario file.
    Validate(ScenarioArg),
}

#[derive(Args)]
struct ScenarioArg {
    /// Scenario file, or `preset:NAME`.
    #[arg(long)]
    scenario: PathBuf,
}

#[derive(Args)]
struct GridArgs {
    /// Times as `t1,t2,...` or `start:stop:step`; overrides the file.
    #[arg(long, allow_hyphen_values = true)]
    t: Option<String>,
    /// MGF arguments, same syntax as `--t`; overrides the file.
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
    /// Output CSV (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    Quadrature,
    Series,
    Closed,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Auto => Method::Auto,
            MethodArg::Quadrature => Method::Quadrature,
            MethodArg::Series => Method::Series,
            MethodArg::Closed => Method::Closed,
        }
    }
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    scenario: ScenarioArg,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_enum, default_value = "auto")]
    method: MethodArg,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    scenario: ScenarioArg,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Per-realization interference as long-format CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct BppArgs {
    #[command(flatten)]
    scenario: ScenarioArg,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    gap_tol: Option<f64>,
    /// Verdict as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) => 4,
            ref e if e.is_numeric() => 3,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: Option<&Path>, e: impl std::fmt::Display) -> Failure {
    let place = path.map_or_else(|| "stdout".to_string(), |p| p.display().to_string());
    Failure {
        code: 4,
        message: format!("{place}: {e}"),
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn load(arg: &ScenarioArg) -> CliResult<(Scenario, RunSpec)> {
    let file = load_scenario_file(&arg.scenario)?;
    let sc = file.to_scenario()?;
    Ok((sc, file.run))
}

fn times(grid: &GridArgs, run: &RunSpec) -> CliResult<Vec<f64>> {
    match (&grid.t, &run.t) {
        (Some(text), _) => Ok(parse_time_grid(text)?),
        (None, Some(g)) => Ok(g.resolve()?),
        (None, None) => Err(usage("no time grid: pass --t or set run.t in the scenario")),
    }
}

fn betas(grid: &GridArgs, run: &RunSpec) -> CliResult<Vec<f64>> {
    match &grid.beta {
        Some(text) => Ok(parse_time_grid(text)?),
        None => Ok(run.beta.clone()),
    }
}

fn open_output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    match path {
        Some(p) => Ok(Box::new(File::create(p).map_err(|e| io_failure(Some(p), e))?)),
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn csv_writer(path: Option<&Path>) -> CliResult<csv::Writer<Box<dyn Write>>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(open_output(path)?))
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_row(w: &mut csv::Writer<Box<dyn Write>>, path: Option<&Path>, row: &[String]) -> CliResult<()> {
    w.write_record(row).map_err(|e| io_failure(path, e))
}

fn predict(args: &PredictArgs) -> CliResult<()> {
    let (sc, run) = load(&args.scenario)?;
    let ts = times(&args.grid, &run)?;
    let bs = betas(&args.grid, &run)?;
    let opts = PredictOptions {
        method: args.method.into(),
        ..PredictOptions::default()
    };
    // Compute everything first so a failure leaves no partial output.
    let mut rows = Vec::with_capacity(ts.len());
    for &t in &ts {
        let p = mean_interference_with(&sc, t, &opts)?;
        let mut row = vec![num(t), num(p.mean), num(p.variance), num(p.variance.sqrt())];
        for &b in &bs {
            row.push(num(mgf_interference_with(&sc, t, b, &opts)?));
        }
        rows.push(row);
    }
    let out = args.grid.out.as_deref();
    let mut w = csv_writer(out)?;
    let mut header: Vec<String> = ["t", "mean", "variance", "std"].map(String::from).into();
    header.extend(bs.iter().map(|b| format!("mgf_beta={b}")));
    write_row(&mut w, out, &header)?;
    for row in &rows {
        write_row(&mut w, out, row)?;
    }
    w.flush().map_err(|e| io_failure(out, e))
}

fn simulate(args: &SimulateArgs) -> CliResult<()> {
    let (sc, run) = load(&args.scenario)?;
    let ts = times(&args.grid, &run)?;
    let bs = betas(&args.grid, &run)?;
    let m = args.realizations.or(run.realizations).unwrap_or(1000);
    let seed = args.seed.or(run.seed).unwrap_or(0);
    check_realization_count(m)?;
    let samples = if ts.is_empty() {
        Vec::new()
    } else {
        realization_matrix(&sc, &ts, m, seed, Execution::default())?
    };
    let out = args.grid.out.as_deref();
    let mut w = csv_writer(out)?;
    let mut header: Vec<String> = ["t", "mean_hat", "std_error", "var_hat"].map(String::from).into();
    for b in &bs {
        header.push(format!("mgf_beta={b}"));
        header.push(format!("mgf_std_error_beta={b}"));
    }
    write_row(&mut w, out, &header)?;
    for (j, &t) in ts.iter().enumerate() {
        let column: Vec<f64> = samples.iter().map(|r| r[j]).collect();
        let st = EmpiricalStats::from_samples(t, &column, None);
        let mut row = vec![num(t), num(st.mean_hat), num(st.std_error_mean), num(st.var_hat)];
        for &b in &bs {
            let sb = EmpiricalStats::from_samples(t, &column, Some(b));
            row.push(num(sb.mgf_hat.unwrap_or(f64::NAN)));
            row.push(num(sb.mgf_std_error.unwrap_or(f64::NAN)));
        }
        write_row(&mut w, out, &row)?;
    }
    w.flush().map_err(|e| io_failure(out, e))?;
    if let Some(path) = &args.trace {
        let mut w = csv_writer(Some(path))?;
        write_row(&mut w, Some(path), &["realization", "t", "interference"].map(String::from))?;
        for (k, r) in samples.iter().enumerate() {
            for (&t, &v) in ts.iter().zip(r) {
                write_row(&mut w, Some(path), &[k.to_string(), num(t), num(v)])?;
            }
        }
        w.flush().map_err(|e| io_failure(Some(path), e))?;
    }
    Ok(())
}

fn bpp_check(args: &BppArgs) -> CliResult<()> {
    let (sc, run) = load(&args.scenario)?;
    let s = sc.anchor();
    let horizon = match args.horizon.or(run.horizon) {
        Some(h) => h,
        None => {
            let first = run.t.as_ref().map(|g| g.resolve()).transpose()?.and_then(|ts| ts.into_iter().find(|&t| t > s));
            first.ok_or_else(|| usage("no horizon: pass --horizon or set run.horizon"))?
        }
    };
    let gap_tol = args.gap_tol.or(run.gap_tol).unwrap_or(DEFAULT_GAP_TOL);
    let v = check_bpp_condition_with(&sc, horizon, gap_tol, Execution::default())?;
    let yes = |b: bool| if b { "satisfied" } else { "violated" };
    println!("BPP approximation: {}", yes(v.satisfied));
    println!("  pairwise ratio gap: {} (final gap {:.3e})", yes(v.pairwise_gap_satisfied), v.max_pairwise_gap);
    println!(
        "  zero ratio limit:   {} (final max ratio {:.3e})",
        yes(v.zero_limit_satisfied),
        v.ratio_trajectory.last().copied().unwrap_or(0.0)
    );
    println!(
        "  probed t in [{:.4e}, {:.4e}], gap_tol {:.1e}",
        v.horizons[0],
        v.horizons[v.horizons.len() - 1],
        gap_tol
    );
    println!("  mobility Lyapunov-stable (advisory): {}", v.lyapunov_stable);
    if let Some(path) = &args.out {
        let json = serde_json::to_string_pretty(&v).map_err(|e| io_failure(Some(path), e))?;
        std::fs::write(path, json + "\n").map_err(|e| io_failure(Some(path), e))?;
    }
    Ok(())
}

fn validate(arg: &ScenarioArg) -> CliResult<()> {
    let (sc, run) = load(arg)?;
    if let Some(g) = &run.t {
        g.resolve()?;
    }
    println!(
        "{}: valid, d = {}, {} interferers, anchor s = {}",
        arg.scenario.display(),
        sc.d,
        sc.len(),
        sc.anchor()
    );
    Ok(())
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("GLC_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| usage(format!("GLC_THREADS must be a positive integer, got {value:?}")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| usage(format!("GLC_THREADS: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Predict(a) => predict(a),
        Command::Simulate(a) => simulate(a),
        Command::BppCheck(a) => bpp_check(a),
        Command::Validate(a) => validate(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
