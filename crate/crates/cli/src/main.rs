//! snt: command line front end for the shot-noise transform toolkit.
//!
//! Three command groups:
//!   simulate  Monte Carlo draws of the shot-noise series, written as CSV
//!   verify    numerical identity checks, each emitting a JSON report
//!   repro     named, self-contained reproduction scenarios
//!
//! Exit codes: 0 success / all checks passed, 1 a verification check failed
//! (the report is still written), 2 usage error, 3 domain or runtime
//! rejection (invalid parameters, Condition A violations, quadrature or
//! series breakdown, output I/O).

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use snt_core::{
    acceptance, dist, engine, make_response, parse_dist_spec, parse_nu_key, parse_response_key,
    solver, stats, Convexity, SntConfig, SntError,
};

#[derive(Parser)]
#[command(
    name = "snt",
    version,
    about = "Poisson shot-noise transforms: simulation, identity verification, reproduction"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Draw Monte Carlo samples of the shot-noise series and write CSV
    Simulate(SimulateArgs),
    /// Run one numerical verification and emit a JSON report
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Run named reproduction scenarios (the full suite by default)
    Repro(ReproArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Input distribution key: gamma:SHAPE,SCALE, linnik:INDEX,SCALE,
    /// glinnik:SHAPE,SCALE,INDEX, s2:DELTA, s2rho:DELTA,RHO,
    /// stable-sub:SPEC,ALPHA or point:M
    #[arg(long)]
    dist: String,
    /// Response function key: sech2, exp, gamma:ALPHA, s2, pow:BASE:G
    #[arg(long)]
    response: String,
    /// Poisson intensity lambda
    #[arg(long)]
    lambda: f64,
    /// Number of samples to draw
    #[arg(long)]
    n: usize,
    /// RNG seed; identical flags and seed give byte-identical output
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Arrival-window truncation mass, in (0, 1e-3]
    #[arg(long)]
    trunc_eps: Option<f64>,
    /// Explicit arrival horizon; required for infinite-mean inputs
    #[arg(long)]
    horizon: Option<f64>,
    /// Output CSV file, written atomically (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Max residual of the transform fixed-point identity on a log grid of
    /// transform abscissae
    FixedPoint(FixedPointArgs),
    /// Levy tail of the shot-noise law at given points (informational)
    Levy(LevyArgs),
    /// First-moment identity of the Levy measure on a uniform grid
    Steutel(SteutelArgs),
    /// Identity linking the Levy first moment to the mixing measure
    Feature(FeatureArgs),
    /// Two-sample KS between a perpetuity terminal sample and a target law
    Perpetuity(PerpetuityArgs),
    /// Classify the log-convexity of a response on a probe grid
    SdLogconvex(SdArgs),
    /// Smallest interior root of the indicator atom equation z = exp(-b(1-z))
    Atom(AtomArgs),
}

#[derive(Args)]
struct FixedPointArgs {
    /// Input distribution key
    #[arg(long)]
    dist: String,
    /// Response function key
    #[arg(long)]
    response: String,
    /// Poisson intensity lambda
    #[arg(long)]
    lambda: f64,
    /// Pass iff the max residual is at most this
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Smallest transform abscissa
    #[arg(long, default_value_t = 1e-3)]
    s_min: f64,
    /// Largest transform abscissa
    #[arg(long, default_value_t = 10.0)]
    s_max: f64,
    /// Number of log-spaced abscissae
    #[arg(long, default_value_t = 50)]
    points: usize,
    /// Also write the JSON report to this file
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LevyArgs {
    /// Input distribution key
    #[arg(long)]
    dist: String,
    /// Response function key
    #[arg(long)]
    response: String,
    /// Poisson intensity lambda
    #[arg(long)]
    lambda: f64,
    /// Evaluation points, comma separated (e.g. --x 0.5,1,2)
    #[arg(long, value_delimiter = ',', required = true)]
    x: Vec<f64>,
    /// Also write the JSON report to this file
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SteutelArgs {
    /// Input distribution key
    #[arg(long)]
    dist: String,
    /// Response function key
    #[arg(long)]
    response: String,
    /// Poisson intensity lambda
    #[arg(long)]
    lambda: f64,
    /// Upper end of the check grid
    #[arg(long, default_value_t = 4.0)]
    x_max: f64,
    /// Grid step
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    /// Pass threshold; defaults to the discretization hint 5 * step
    #[arg(long)]
    tol: Option<f64>,
    /// Also write the JSON report to this file
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FeatureArgs {
    #[command(flatten)]
    grid: SteutelArgs,
    /// Mixing measure key (nu-beta:1,A, nu-uniform, nu-s2); derived from
    /// the response and lambda when omitted
    #[arg(long)]
    nu: Option<String>,
}

#[derive(Args)]
struct PerpetuityArgs {
    /// Increment law of the recursion
    #[arg(long)]
    dist: String,
    /// Mixing measure of the multiplier, e.g. nu-beta:1,0.5
    #[arg(long)]
    nu: String,
    /// Recursion depth
    #[arg(long, default_value_t = 200)]
    steps: usize,
    /// Sample size for both samples
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    /// Seed of the perpetuity sample
    #[arg(long, default_value_t = 4242)]
    seed: u64,
    /// Law the terminal sample is tested against
    #[arg(long)]
    target: String,
    /// Seed of the target sample (seed + 7777 when omitted)
    #[arg(long)]
    target_seed: Option<u64>,
    /// KS significance level (0.01 or 0.05)
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    /// Also write the JSON report to this file
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SdArgs {
    /// Response function key
    #[arg(long)]
    response: String,
    /// Left end of the probe grid
    #[arg(long, default_value_t = 0.25)]
    u_min: f64,
    /// Right end of the probe grid
    #[arg(long, default_value_t = 8.3)]
    u_max: f64,
    /// Number of equally spaced probe points
    #[arg(long, default_value_t = 24)]
    points: usize,
    /// Fail (exit 1) unless the classification matches
    #[arg(long, value_enum)]
    expect: Option<ExpectClass>,
    /// Also write the JSON report to this file
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExpectClass {
    LogConvex,
    LogConcave,
    LogLinear,
    Mixed,
}

impl From<ExpectClass> for Convexity {
    fn from(e: ExpectClass) -> Self {
        match e {
            ExpectClass::LogConvex => Convexity::LogConvex,
            ExpectClass::LogConcave => Convexity::LogConcave,
            ExpectClass::LogLinear => Convexity::LogLinear,
            ExpectClass::Mixed => Convexity::Mixed,
        }
    }
}

#[derive(Args)]
struct AtomArgs {
    /// Load b = lambda * a * height of the excluded indicator response
    #[arg(long, allow_negative_numbers = true)]
    b: f64,
    /// Also write the JSON report to this file
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReproArgs {
    /// Run only these scenario ids, comma separated
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    /// List scenario ids and exit without computing anything
    #[arg(long)]
    list: bool,
    /// Also write the summary table to this file
    #[arg(long)]
    out: Option<PathBuf>,
}

enum CliError {
    Snt(SntError),
    Io(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Snt(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "output write failed: {e}"),
        }
    }
}

impl From<SntError> for CliError {
    fn from(e: SntError) -> Self {
        CliError::Snt(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult = Result<bool, CliError>;

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

/// SNT_THREADS caps the worker pool; results do not depend on it.
fn init_thread_pool() {
    let Ok(v) = std::env::var("SNT_THREADS") else { return };
    match v.trim().parse::<usize>() {
        Ok(k) if k >= 1 => {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
        }
        _ => eprintln!("warning: ignoring SNT_THREADS={v:?} (want an integer >= 1)"),
    }
}

fn run(cmd: Cmd) -> CliResult {
    match cmd {
        Cmd::Simulate(a) => run_simulate(a),
        Cmd::Verify(v) => match v {
            VerifyCmd::FixedPoint(a) => run_fixed_point(a),
            VerifyCmd::Levy(a) => run_levy(a),
            VerifyCmd::Steutel(a) => run_steutel(a),
            VerifyCmd::Feature(a) => run_feature(a),
            VerifyCmd::Perpetuity(a) => run_perpetuity(a),
            VerifyCmd::SdLogconvex(a) => run_sd_logconvex(a),
            VerifyCmd::Atom(a) => run_atom(a),
        },
        Cmd::Repro(a) => run_repro(a),
    }
}

fn build_config(
    response_key: &str,
    lambda: f64,
    trunc_eps: Option<f64>,
    horizon: Option<f64>,
) -> Result<SntConfig, SntError> {
    let response = make_response(parse_response_key(response_key)?)?;
    let mut cfg = SntConfig::new(lambda, response)?;
    if let Some(eps) = trunc_eps {
        cfg = cfg.with_trunc_eps(eps)?;
    }
    if let Some(t) = horizon {
        cfg = cfg.with_horizon(t)?;
    }
    Ok(cfg)
}

fn run_simulate(a: SimulateArgs) -> CliResult {
    let input = parse_dist_spec(&a.dist)?;
    let cfg = build_config(&a.response, a.lambda, a.trunc_eps, a.horizon)?;
    let sample = engine::sample_snt(&cfg, &input, a.n, a.seed)?;
    emit_text(a.out.as_deref(), &sample.to_csv_string(), false)?;
    Ok(true)
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, SntError> {
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) {
        return Err(SntError::InvalidParameter(format!(
            "need 0 < s_min < s_max, got [{lo}, {hi}]"
        )));
    }
    if !(2..=100_000).contains(&n) {
        return Err(SntError::InvalidParameter(format!(
            "grid size must lie in 2..=100000, got {n}"
        )));
    }
    Ok((0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect())
}

fn run_fixed_point(a: FixedPointArgs) -> CliResult {
    let input = parse_dist_spec(&a.dist)?;
    let cfg = build_config(&a.response, a.lambda, None, None)?;
    let grid = log_grid(a.s_min, a.s_max, a.points)?;
    let report = engine::lst_residual(&input, &cfg, &grid)?;
    let pass = report.max_residual <= a.tol;
    let mut v = serde_json::to_value(&report).expect("report serializes");
    let obj = v.as_object_mut().expect("report is an object");
    obj.insert("tol".into(), json!(a.tol));
    obj.insert("pass".into(), json!(pass));
    emit_json(a.out.as_deref(), &v)?;
    Ok(pass)
}

fn run_levy(a: LevyArgs) -> CliResult {
    let input = parse_dist_spec(&a.dist)?;
    let cfg = build_config(&a.response, a.lambda, None, None)?;
    let mut points = Vec::with_capacity(a.x.len());
    for &x in &a.x {
        let tail = engine::levy_tail(&input, &cfg, x)?;
        points.push(json!({ "x": x, "tail": tail }));
    }
    let v = json!({
        "schema": 1,
        "label": format!(
            "levy tail M(x, inf): dist={}, response={}, lambda={}",
            input.key(), a.response, a.lambda
        ),
        "points": points,
    });
    emit_json(a.out.as_deref(), &v)?;
    Ok(true)
}

fn run_steutel(a: SteutelArgs) -> CliResult {
    let input = parse_dist_spec(&a.dist)?;
    let cfg = build_config(&a.response, a.lambda, None, None)?;
    let report = engine::steutel_check(&input, &cfg, a.x_max, a.step)?;
    finish_grid_check(report, a.tol, a.out.as_deref())
}

fn run_feature(a: FeatureArgs) -> CliResult {
    let g = a.grid;
    let input = parse_dist_spec(&g.dist)?;
    let cfg = build_config(&g.response, g.lambda, None, None)?;
    let nu = match &a.nu {
        Some(key) => parse_nu_key(key)?,
        None => cfg.response().to_mixing_measure(cfg.lambda())?,
    };
    let report = engine::feature_check(&input, &cfg, &nu, g.x_max, g.step)?;
    finish_grid_check(report, g.tol, g.out.as_deref())
}

fn finish_grid_check(
    report: snt_core::GridCheck,
    tol: Option<f64>,
    out: Option<&Path>,
) -> CliResult {
    let tol = tol.unwrap_or(report.tolerance_hint);
    let pass = report.max_residual <= tol;
    let mut v = serde_json::to_value(&report).expect("report serializes");
    let obj = v.as_object_mut().expect("report is an object");
    obj.insert("tol".into(), json!(tol));
    obj.insert("pass".into(), json!(pass));
    emit_json(out, &v)?;
    Ok(pass)
}

fn run_perpetuity(a: PerpetuityArgs) -> CliResult {
    let base = parse_dist_spec(&a.dist)?;
    let target = parse_dist_spec(&a.target)?;
    let nu = parse_nu_key(&a.nu)?;
    let perp = solver::perpetuity_sample(&nu, &base, a.steps, a.n, a.seed)?;
    let target_seed = a.target_seed.unwrap_or(a.seed.wrapping_add(7777));
    let tgt = dist::sample(&target, a.n, target_seed)?;
    let report = stats::ks_two_sample(&perp, &tgt, a.alpha, "perpetuity terminal vs target")?;
    let pass = report.pass;
    let mut v = serde_json::to_value(&report).expect("report serializes");
    let obj = v.as_object_mut().expect("report is an object");
    obj.insert("perpetuity".into(), json!(perp.provenance));
    obj.insert("target".into(), json!(tgt.provenance));
    obj.insert("target_seed".into(), json!(target_seed));
    emit_json(a.out.as_deref(), &v)?;
    Ok(pass)
}

fn run_sd_logconvex(a: SdArgs) -> CliResult {
    let response = make_response(parse_response_key(&a.response)?)?;
    if !(a.u_min.is_finite() && a.u_max.is_finite() && a.u_min >= 0.0 && a.u_max > a.u_min) {
        return Err(SntError::InvalidParameter(format!(
            "need 0 <= u_min < u_max, got [{}, {}]",
            a.u_min, a.u_max
        ))
        .into());
    }
    if !(3..=100_000).contains(&a.points) {
        return Err(SntError::InvalidParameter(format!(
            "probe grid size must lie in 3..=100000, got {}",
            a.points
        ))
        .into());
    }
    let grid: Vec<f64> = (0..a.points)
        .map(|i| a.u_min + (a.u_max - a.u_min) * i as f64 / (a.points - 1) as f64)
        .collect();
    let report = response.log_convexity_probe(&grid)?;
    let pass = a.expect.map_or(true, |e| Convexity::from(e) == report.classification);
    let v = json!({
        "schema": 1,
        "response": a.response,
        "u_min": a.u_min,
        "u_max": a.u_max,
        "points": a.points,
        "classification": report.classification,
        "second_differences": report.second_differences,
        "expect": a.expect.map(Convexity::from),
        "pass": pass,
    });
    emit_json(a.out.as_deref(), &v)?;
    Ok(pass)
}

fn run_atom(a: AtomArgs) -> CliResult {
    let root = solver::atom_root(a.b)?;
    let v = json!({
        "schema": 1,
        "b": a.b,
        "root": root,
        "note": "smallest root of z = exp(-b (1 - z)) in (0, 1); null when b <= 1",
    });
    emit_json(a.out.as_deref(), &v)?;
    Ok(true)
}

fn run_repro(a: ReproArgs) -> CliResult {
    if a.list {
        let mut text = String::new();
        for id in acceptance::criterion_ids() {
            text.push_str(id);
            text.push('\n');
        }
        emit_text(a.out.as_deref(), &text, true)?;
        return Ok(true);
    }
    let ids: Vec<String> = if a.only.is_empty() {
        acceptance::criterion_ids().iter().map(|s| s.to_string()).collect()
    } else {
        a.only
    };
    let mut outcomes = Vec::with_capacity(ids.len());
    for id in &ids {
        let out = acceptance::run(id)?;
        // stream progress; the full table below is what --out captures
        eprintln!("{} {}", if out.pass { "PASS" } else { "FAIL" }, out.id);
        outcomes.push(out);
    }
    let width = outcomes.iter().map(|o| o.id.len()).max().unwrap_or(0);
    let mut table = String::new();
    for o in &outcomes {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        table.push_str(&format!("{tag} {:<width$}  {}\n", o.id, o.detail));
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    table.push_str(&format!(
        "{} scenario{}: {} passed, {} failed\n",
        outcomes.len(),
        if outcomes.len() == 1 { "" } else { "s" },
        passed,
        outcomes.len() - passed
    ));
    emit_text(a.out.as_deref(), &table, true)?;
    Ok(passed == outcomes.len())
}

/// Write to stdout, to a file, or (for reports meant for both) to each.
/// Files go through a temp-and-rename so readers never see partial output.
fn emit_text(out: Option<&Path>, text: &str, also_stdout: bool) -> Result<(), CliError> {
    match out {
        Some(path) => {
            write_atomic(path, text.as_bytes())?;
            if also_stdout {
                print!("{text}");
            }
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn emit_json(out: Option<&Path>, v: &serde_json::Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(v).expect("json value serializes");
    text.push('\n');
    print!("{text}");
    if let Some(path) = out {
        write_atomic(path, text.as_bytes())?;
    }
    Ok(())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}
