//! `bellman-verify`: evaluate the Bellman function, run the certification
//! suites and the dyadic-martingale simulations, and summarise their reports.
//!
//! Exit codes: 0 success, 1 internal or I/O error, 2 usage or configuration
//! error, 3 a check or inequality failed.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use bellman_verify::bellman::{eval_b_maximal, eval_bellman, BellmanPoint, MaxPoint};
use bellman_verify::sim::{
    run_ensemble, run_random_ensemble, sweep_characteristic, HLaw, LeafLaw, RandomEnsemble,
    SimConfig, MAX_DEPTH,
};
use bellman_verify::verifier::{Suite, SymmetricMatrix, VerifyOptions};
use bellman_verify::{DomainParams, Error};

use config::{config_hash, ConfigFile};
use output::{Emitter, Format};

pub const TOOL: &str = "bellman-verify";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
const WORKERS_ENV: &str = "BELLMAN_VERIFY_WORKERS";
const DEFAULT_GRID: usize = 10_000;

/// A usage or configuration problem; exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

enum Failure {
    Usage(String),
    Internal(String),
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Internal(_) => Failure::Internal(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Internal(format!("i/o error: {e}"))
    }
}

#[derive(Parser, Debug)]
#[command(name = "bellman-verify", version, about = "Certify the weighted L2 Bellman function and simulate dyadic martingales")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Plain-text key=value file; flags on the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: BELLMAN_VERIFY_WORKERS, then all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Directory for report files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Keep wall-clock timings in JSON output (breaks byte-reproducibility).
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate B (and optionally its maximal extension) at one point.
    Eval(EvalArgs),
    /// Run named verification suites over parameter grids.
    Verify(VerifyArgs),
    /// Run a dyadic-tree ensemble and check the inequalities exactly.
    Simulate(SimulateArgs),
    /// Summarise JSON reports written by `verify` and `simulate`.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    c: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x: f64,
    #[arg(long, allow_hyphen_values = true)]
    y: f64,
    #[arg(long)]
    w: f64,
    #[arg(long)]
    v: f64,
    /// Running-maximum coordinate; adds the maximal extension to the output.
    #[arg(long, allow_hyphen_values = true)]
    z: Option<f64>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Comma-separated check names (default: all).
    #[arg(long, value_delimiter = ',')]
    suite: Vec<String>,
    /// Comma-separated values of c.
    #[arg(long, value_delimiter = ',')]
    c: Vec<f64>,
    /// Approximate grid points per value of c.
    #[arg(long)]
    grid: Option<usize>,
    /// Override every check's tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Use exact rational minors for the Sylvester test.
    #[arg(long)]
    exact_rational: bool,
    #[arg(long)]
    lambda_samples: Option<usize>,
    /// Write per-point CSV dumps into --out.
    #[arg(long)]
    dump: bool,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    trees: Option<usize>,
    /// Tree depth; with --random, the largest depth drawn.
    #[arg(long)]
    depth: Option<usize>,
    /// Target characteristic; with --random, the largest target drawn.
    #[arg(long = "char")]
    characteristic: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// power | two-point
    #[arg(long)]
    leaf_law: Option<String>,
    /// greedy | alternating | random | constant:<h>
    #[arg(long)]
    h_law: Option<String>,
    /// Draw depth, target and laws per tree.
    #[arg(long)]
    random: bool,
    /// Comma-separated targets for a characteristic sweep.
    #[arg(long, value_delimiter = ',')]
    sweep: Vec<f64>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// JSON report files or directories containing them (default: --out).
    inputs: Vec<PathBuf>,
}

#[derive(Debug, Serialize)]
struct EvalConfig {
    c: f64,
    x: f64,
    y: f64,
    w: f64,
    v: f64,
    z: Option<f64>,
}

#[derive(Debug, Serialize)]
struct VerifyConfig {
    suites: Vec<String>,
    c: Vec<f64>,
    grid: usize,
    tol: Option<f64>,
    exact_rational: bool,
    lambda_samples: usize,
}

#[derive(Debug, Serialize)]
struct SimulateConfig {
    trees: usize,
    depth: usize,
    characteristic: f64,
    seed: u64,
    leaf_law: String,
    h_law: String,
    random: bool,
    sweep: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct RunConfig<T> {
    command: &'static str,
    #[serde(flatten)]
    body: T,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn resolve_workers(flag: Option<usize>, file: &ConfigFile) -> Result<Option<usize>, UsageError> {
    let from_file = file.pick(flag, "workers")?;
    let n = match from_file {
        Some(n) => Some(n),
        None => match std::env::var(WORKERS_ENV) {
            Ok(s) => Some(
                s.trim()
                    .parse::<usize>()
                    .map_err(|e| UsageError(format!("{WORKERS_ENV}: {e}")))?,
            ),
            Err(_) => None,
        },
    };
    if n == Some(0) {
        return Err(UsageError("workers must be at least 1".to_string()));
    }
    Ok(n)
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let workers = resolve_workers(cli.workers, &file)?;
    let out = file.pick(cli.out.clone(), "out")?;
    let format = file.pick(cli.format, "format")?;
    let timings = file.pick_flag(cli.timings, "timings")?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Failure::Internal(format!("cannot start worker pool: {e}")))?;
    let emitter = Emitter::new(out, format, timings);
    pool.install(|| match cli.command {
        Command::Eval(a) => cmd_eval(a, &file, &emitter),
        Command::Verify(a) => cmd_verify(a, &file, &emitter),
        Command::Simulate(a) => cmd_simulate(a, &file, &emitter),
        Command::Report(a) => cmd_report(a, &emitter),
    })
}

fn cmd_eval(a: EvalArgs, file: &ConfigFile, emitter: &Emitter) -> Result<bool, Failure> {
    let c = file
        .pick(a.c, "c")?
        .ok_or_else(|| UsageError("eval needs --c".to_string()))?;
    let params = DomainParams::new(c)?;
    let p = BellmanPoint::new(a.x, a.y, a.w, a.v);
    let e = eval_bellman(&p, &params)?;
    let rows: Vec<&[f64]> = e.hessian.iter().map(|r| r.as_slice()).collect();
    let eigenvalues = SymmetricMatrix::from_rows(&rows).eigenvalues();
    let maximal = a
        .z
        .map(|z| eval_b_maximal(&MaxPoint::new(a.x, a.y, z, a.w, a.v), &params))
        .transpose()?;
    let cfg = RunConfig {
        command: "eval",
        body: EvalConfig {
            c,
            x: a.x,
            y: a.y,
            w: a.w,
            v: a.v,
            z: a.z,
        },
    };
    let hash = config_hash(&cfg);
    let mut result = json!({
        "c": c,
        "point": p,
        "t": p.t(),
        "value": e.value,
        "region": e.region,
        "piece": e.piece,
        "gradient": e.gradient,
        "hessian": e.hessian,
        "hessian_eigenvalues": eigenvalues,
        "on_boundary": e.on_boundary,
        "degenerate": e.degenerate,
    });
    if let Some(m) = maximal {
        result["maximal_value"] = json!(m);
    }
    let doc = output::envelope("eval", &hash, &cfg, true, json!({ "eval": result }));
    let csv = output::eval_csv(&hash, &p, &e, &eigenvalues)?;
    emitter.emit("eval", &doc, &[("eval.csv", csv)])?;
    Ok(true)
}

fn cmd_verify(a: VerifyArgs, file: &ConfigFile, emitter: &Emitter) -> Result<bool, Failure> {
    let names = file.pick_list(a.suite, "suite")?;
    let suites = if names.is_empty() {
        Suite::ALL.to_vec()
    } else {
        names
            .iter()
            .map(|n| Suite::parse(n))
            .collect::<Result<Vec<_>, _>>()?
    };
    let mut c_values = file.pick_list(a.c, "c")?;
    if c_values.is_empty() {
        c_values = vec![2.0];
    }
    for &c in &c_values {
        DomainParams::new(c)?;
    }
    let grid = file.pick(a.grid, "grid")?.unwrap_or(DEFAULT_GRID);
    if grid == 0 {
        return Err(UsageError("grid must be positive".to_string()).into());
    }
    let tol = file.pick(a.tol, "tol")?;
    if let Some(t) = tol {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(UsageError(format!("tolerance must be finite and >= 0, got {t}")).into());
        }
    }
    let lambda_samples = file
        .pick(a.lambda_samples, "lambda-samples")?
        .unwrap_or(bellman_verify::verifier::DEFAULT_LAMBDA_SAMPLES);
    let exact_rational = file.pick_flag(a.exact_rational, "exact-rational")?;
    let dump = file.pick_flag(a.dump, "dump")?;
    if dump && !emitter.has_out() {
        return Err(UsageError("--dump needs --out".to_string()).into());
    }
    let opts = VerifyOptions {
        tolerance: tol,
        lambda_samples,
        exact_rational,
    };
    let cfg = RunConfig {
        command: "verify",
        body: VerifyConfig {
            suites: suites.iter().map(|s| s.name().to_string()).collect(),
            c: c_values.clone(),
            grid,
            tol,
            exact_rational,
            lambda_samples,
        },
    };
    let hash = config_hash(&cfg);

    let mut reports = Vec::with_capacity(suites.len());
    for s in &suites {
        let spec = s.default_grid(c_values.clone(), grid).with_dump(dump);
        let mut rep = s.run(&spec, &opts)?;
        if !emitter.timings() {
            rep.strip_timing();
        }
        reports.push(rep);
    }
    let pass = reports.iter().all(|r| r.pass);

    let mut files = vec![("verify.csv".to_string(), output::verify_csv(&hash, &reports)?)];
    if dump {
        for r in &reports {
            files.push((format!("{}.points.csv", r.check), output::dump_csv(&hash, r)?));
        }
    }
    let doc = output::envelope("verify", &hash, &cfg, pass, json!({ "reports": reports }));
    let files: Vec<(&str, String)> = files.iter().map(|(n, s)| (n.as_str(), s.clone())).collect();
    emitter.emit("verify", &doc, &files)?;
    Ok(pass)
}

fn parse_leaf_law(s: &str) -> Result<LeafLaw, UsageError> {
    match s.replace('_', "-").as_str() {
        "power" => Ok(LeafLaw::Power),
        "two-point" => Ok(LeafLaw::TwoPoint),
        other => Err(UsageError(format!("unknown leaf law '{other}' (power, two-point)"))),
    }
}

fn parse_h_law(s: &str) -> Result<HLaw, UsageError> {
    match s {
        "greedy" => Ok(HLaw::Greedy),
        "alternating" => Ok(HLaw::Alternating),
        "random" => Ok(HLaw::Random),
        other => {
            let h = other
                .strip_prefix("constant:")
                .and_then(|h| h.parse::<f64>().ok())
                .ok_or_else(|| {
                    UsageError(format!(
                        "unknown multiplier law '{other}' (greedy, alternating, random, constant:<h>)"
                    ))
                })?;
            let law = HLaw::Constant(h);
            law.validate().map_err(|e| UsageError(e.to_string()))?;
            Ok(law)
        }
    }
}

fn cmd_simulate(a: SimulateArgs, file: &ConfigFile, emitter: &Emitter) -> Result<bool, Failure> {
    let defaults = SimConfig::default();
    let trees = file.pick(a.trees, "trees")?.unwrap_or(defaults.trees);
    let depth = file.pick(a.depth, "depth")?.unwrap_or(defaults.depth);
    if depth == 0 || depth > MAX_DEPTH {
        return Err(UsageError(format!("depth must be in 1..={MAX_DEPTH}, got {depth}")).into());
    }
    let characteristic = file
        .pick(a.characteristic, "char")?
        .unwrap_or(defaults.c_target);
    let seed = file.pick(a.seed, "seed")?.unwrap_or(defaults.seed);
    let leaf_name = file
        .pick(a.leaf_law, "leaf-law")?
        .unwrap_or_else(|| "two-point".to_string());
    let h_name = file
        .pick(a.h_law, "h-law")?
        .unwrap_or_else(|| "greedy".to_string());
    let leaf_law = parse_leaf_law(&leaf_name)?;
    let h_law = parse_h_law(&h_name)?;
    let random = file.pick_flag(a.random, "random")?;
    let sweep = file.pick_list(a.sweep, "sweep")?;

    let sim = SimConfig {
        depth,
        seed,
        c_target: characteristic,
        leaf_law,
        h_law,
        trees,
    };
    sim.validate().map_err(|e| UsageError(e.to_string()))?;
    for &c in &sweep {
        if !(c.is_finite() && c >= 1.0) {
            return Err(UsageError(format!("sweep targets must be >= 1, got {c}")).into());
        }
    }
    let cfg = RunConfig {
        command: "simulate",
        body: SimulateConfig {
            trees,
            depth,
            characteristic,
            seed,
            leaf_law: leaf_name,
            h_law: h_name,
            random,
            sweep: sweep.clone(),
        },
    };
    let hash = config_hash(&cfg);

    let mut ensemble = if random {
        run_random_ensemble(&RandomEnsemble {
            seed,
            trees,
            max_depth: depth,
            max_characteristic: characteristic,
        })?
    } else {
        run_ensemble(&sim)?
    };
    if !emitter.timings() {
        ensemble.supermartingale.strip_timing();
    }
    let sweep_rows = if sweep.is_empty() {
        Vec::new()
    } else {
        sweep_characteristic(&sim, &sweep)?
    };
    let pass = ensemble.summary.pass && sweep_rows.iter().all(|r| r.max_l2_ratio <= 1.0);

    let trees_csv = output::trees_csv(&hash, &ensemble)?;
    let mut files = vec![("trees.csv", trees_csv)];
    if !sweep.is_empty() {
        files.push(("sweep.csv", output::sweep_csv(&hash, &sweep_rows)?));
    }
    // With a sweep, CSV on stdout is the sweep table.
    if !sweep.is_empty() {
        files.swap(0, 1);
    }
    let doc = output::envelope(
        "simulate",
        &hash,
        &cfg,
        pass,
        json!({ "ensemble": ensemble, "sweep": sweep_rows }),
    );
    emitter.emit("simulate", &doc, &files)?;
    Ok(pass)
}

fn cmd_report(a: ReportArgs, emitter: &Emitter) -> Result<bool, Failure> {
    let mut inputs = a.inputs;
    if inputs.is_empty() {
        match emitter.out_dir() {
            Some(d) => inputs.push(d.to_path_buf()),
            None => return Err(UsageError("report needs input files or --out".to_string()).into()),
        }
    }
    let rows = output::collect_report_rows(&inputs)?;
    let pass = rows.iter().all(|r| r.pass);
    emitter.emit_report(&rows)?;
    Ok(pass)
}
