//! The `cot-lab` command line.
//!
//! Every subcommand that writes a file (`--out`) also writes
//! `<out>.manifest.json`, a [`RunManifest`] recording the command line, a
//! hash of all numeric inputs (including the contents of input files), the
//! library version and the seed. `--json` prints the result as JSON on stdout.
//!
//! Exit codes: 0 on success, 1 on bad input or usage, 2 when a numerical
//! method fails.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::binary::{self, BinaryConfig, UncodedDecoder};
use crate::curves::CurveTable;
use crate::error::{Error, Result};
use crate::gaussian::{self, GaussianConfig};
use crate::hybrid::{evaluate, HybridSpec};
use crate::infokit::{blahut_arimoto, ot_min_cost, rate_limited_ot, DiscreteChannel, DiscreteDistribution, Matrix};
use crate::numkit::Tolerance;
use crate::plot::{emit_plot_script, Figure};
use crate::sim::{self, BlockCodeConfig, SimConfig, SimReport};

/// Environment variable capping the number of simulation workers.
pub const THREADS_ENV: &str = "COT_LAB_THREADS";

/// Capacity to a duality gap of 1e-12 bits.
const CAPACITY_TOL: Tolerance = Tolerance { abs_tol: 1e-12, rel_tol: 1e-12, max_iter: 1_000_000 };

/// Provenance record written next to every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    /// SHA-256 over the subcommand, its numeric arguments and the bytes of
    /// every input file.
    pub config_hash: String,
    pub library_version: String,
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
}

#[derive(Parser, Debug)]
#[command(name = "cot-lab", version, about = "Channel-aware optimal transport: curves, bounds, solvers and simulators")]
struct Cli {
    /// Print the result as JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Binary-source distortion curves over a crossover grid (CSV).
    BinaryCurves(BinaryCurvesArgs),
    /// Mode switches of the optimized binary hybrid scheme.
    BinaryThresholds(BinaryThresholdsArgs),
    /// Gaussian-source distortion curves over a power grid (CSV).
    GaussianCurves(GaussianCurvesArgs),
    /// Power below which the Gaussian hybrid scheme is uncoded.
    GammaStar(LambdasArgs),
    /// Cost-constrained capacity of a channel given as JSON.
    Capacity(CapacityArgs),
    /// Optimal transport under a mutual-information budget.
    RlOt(RlOtArgs),
    /// Exact optimal transport between two marginals.
    Ot(OtArgs),
    /// Evaluate a hybrid coding candidate given as JSON.
    HybridEval(HybridEvalArgs),
    /// Monte Carlo and random-coding simulators.
    #[command(subcommand)]
    Simulate(SimCommand),
    /// Gnuplot script for one of fig1..fig6 from a curve CSV.
    EmitPlot(EmitPlotArgs),
}

#[derive(Args, Debug, Serialize)]
struct BinaryCurvesArgs {
    #[arg(long)]
    rho: f64,
    #[arg(long, default_value_t = 0.0)]
    theta_min: f64,
    #[arg(long, default_value_t = 0.5)]
    theta_max: f64,
    #[arg(long, default_value_t = 512)]
    points: usize,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct BinaryThresholdsArgs {
    #[arg(long)]
    rho: f64,
    #[arg(long, default_value_t = 0.0)]
    theta_min: f64,
    #[arg(long, default_value_t = 0.5)]
    theta_max: f64,
    #[arg(long, default_value_t = 512)]
    points: usize,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct GaussianCurvesArgs {
    /// Source eigenvalues, comma separated, descending.
    #[arg(long, value_delimiter = ',', required = true)]
    lambdas: Vec<f64>,
    #[arg(long, default_value_t = 0.01)]
    gamma_min: f64,
    #[arg(long, default_value_t = 10.0)]
    gamma_max: f64,
    #[arg(long, default_value_t = 256)]
    points: usize,
    /// Space the grid evenly in log(gamma).
    #[arg(long)]
    log_grid: bool,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct LambdasArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    lambdas: Vec<f64>,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct CapacityArgs {
    /// Channel JSON: `{"matrix": [[...]], "cost": [...]}`.
    #[arg(long)]
    channel: PathBuf,
    /// Budget on the expected input cost (unconstrained if omitted).
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct RlOtArgs {
    /// Problem JSON: `{"row": {"probs": [...]}, "col": {...}, "cost": [[...]]}`.
    #[arg(long)]
    problem: PathBuf,
    /// Information budgets in bits, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    rate: Vec<f64>,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct OtArgs {
    #[arg(long)]
    problem: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct HybridEvalArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct EmitPlotArgs {
    #[arg(long)]
    csv: PathBuf,
    /// One of fig1..fig6.
    #[arg(long)]
    figure: String,
    /// Script path; defaults to `<figure>.gp` next to the CSV.
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SimArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    /// Worker threads (default: all cores, capped by COT_LAB_THREADS).
    #[arg(long)]
    #[serde(skip)]
    workers: Option<usize>,
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum SimCommand {
    /// Binary source through BSC(theta), uncoded.
    UncodedBinary {
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        theta: f64,
        /// Decoder p(Y=1|V=0); with --b overrides the optimized decoder.
        #[arg(long, requires = "b")]
        a: Option<f64>,
        /// Decoder p(Y=0|V=1).
        #[arg(long, requires = "a")]
        b: Option<f64>,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Gaussian source over AWGN, uncoded.
    UncodedGaussian {
        #[arg(long, value_delimiter = ',', required = true)]
        lambdas: Vec<f64>,
        #[arg(long)]
        gamma: f64,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Binary hybrid scheme with the digital part delivered by a genie.
    GenieHybrid {
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        delta1: f64,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Random-coding binary hybrid scheme at small block length;
    /// `--samples` is the number of blocks per codebook.
    BlockHybrid {
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        delta1: f64,
        /// Block length.
        #[arg(long)]
        n: usize,
        /// Codebook rate, bits per symbol.
        #[arg(long)]
        rate: f64,
        /// Joint-typicality tolerance (sup norm of the type deviation).
        #[arg(long, default_value_t = 0.1)]
        typ_delta: f64,
        #[arg(long, default_value_t = 32)]
        codebooks: usize,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Random linear schemes against the uncoded Gaussian bound.
    LinearBound {
        #[arg(long, value_delimiter = ',', required = true)]
        lambdas: Vec<f64>,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[command(flatten)]
        sim: SimArgs,
    },
}

impl SimCommand {
    fn sim_args(&self) -> &SimArgs {
        match self {
            SimCommand::UncodedBinary { sim, .. }
            | SimCommand::UncodedGaussian { sim, .. }
            | SimCommand::GenieHybrid { sim, .. }
            | SimCommand::BlockHybrid { sim, .. }
            | SimCommand::LinearBound { sim, .. } => sim,
        }
    }
}

#[derive(Debug, Deserialize)]
struct TransportProblem {
    row: DiscreteDistribution,
    col: DiscreteDistribution,
    cost: Matrix,
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code. Usage errors go to stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let command_line = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli, command_line) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}

/// What a subcommand produced, before it is written out.
enum Output {
    Csv(CurveTable, Value),
    Json(Value, String),
    Text(String, String),
}

struct Run {
    output: Output,
    out: Option<PathBuf>,
    seed: Option<u64>,
    inputs: Vec<PathBuf>,
}

fn execute(cli: &Cli, command_line: Vec<String>) -> Result<()> {
    let start = Instant::now();
    let run = dispatch(&cli.command)?;
    let mut hasher = Sha256::new();
    hasher.update(serde_json::to_vec(&cli.command)?);
    for p in &run.inputs {
        hasher.update(std::fs::read(p)?);
    }
    let config_hash = hex::encode(hasher.finalize());

    let (file_bytes, stdout) = match &run.output {
        Output::Csv(table, summary) => {
            let stdout = if cli.json { pretty(summary)? } else { summarize_csv(table) };
            (table.to_csv_string(), stdout)
        }
        Output::Json(value, text) => {
            let body = pretty(value)?;
            (body.clone(), if cli.json { body } else { text.clone() })
        }
        Output::Text(body, json_text) => (body.clone(), if cli.json { json_text.clone() } else { body.clone() }),
    };
    if let Some(out) = &run.out {
        std::fs::write(out, file_bytes)?;
        let manifest = RunManifest {
            command_line,
            config_hash,
            library_version: env!("CARGO_PKG_VERSION").into(),
            seed: run.seed,
            outputs: vec![out.display().to_string()],
            wall_clock_seconds: start.elapsed().as_secs_f64(),
        };
        std::fs::write(manifest_path(out), pretty(&serde_json::to_value(&manifest)?)?)?;
    }
    print!("{stdout}");
    Ok(())
}

/// `<out>.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn pretty(v: &Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn summarize_csv(t: &CurveTable) -> String {
    format!("{} rows x {} columns ({})\n", t.len(), t.columns().len(), t.columns().join(","))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn workers(requested: Option<usize>) -> Result<usize> {
    let cap = match std::env::var(THREADS_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| Error::Invalid(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?,
        ),
        Err(_) => None,
    };
    let n = requested.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    Ok(cap.map_or(n, |c| n.min(c)))
}

fn dispatch(cmd: &Command) -> Result<Run> {
    let plain = |output, out: &Option<PathBuf>| Run { output, out: out.clone(), seed: None, inputs: vec![] };
    Ok(match cmd {
        Command::BinaryCurves(a) => {
            let cfg = BinaryConfig::uniform(a.rho, a.theta_min, a.theta_max, a.points)?;
            let rows = binary::binary_rows(&cfg)?;
            let table = binary::binary_curves(&cfg)?;
            plain(Output::Csv(table, serde_json::to_value(rows)?), &a.out)
        }
        Command::BinaryThresholds(a) => {
            let cfg = BinaryConfig::uniform(a.rho, a.theta_min, a.theta_max, a.points)?;
            let switches = binary::thresholds(&cfg)?;
            let mut text = String::new();
            for s in &switches {
                text.push_str(&format!("{} -> {} at theta = {:.5}\n", s.from, s.to, s.theta));
            }
            if switches.is_empty() {
                text.push_str("no mode switch on the grid\n");
            }
            let value = json!({ "rho": a.rho, "switches": switches });
            plain(Output::Json(value, text), &a.out)
        }
        Command::GaussianCurves(a) => {
            let cfg = if a.log_grid {
                GaussianConfig::log_grid(a.lambdas.clone(), a.gamma_min, a.gamma_max, a.points)?
            } else {
                GaussianConfig::uniform(a.lambdas.clone(), a.gamma_min, a.gamma_max, a.points)?
            };
            let rows = gaussian::gaussian_rows(&cfg)?;
            let table = gaussian::gaussian_curves(&cfg)?;
            plain(Output::Csv(table, serde_json::to_value(rows)?), &a.out)
        }
        Command::GammaStar(a) => {
            let g = gaussian::gamma_star(&a.lambdas)?;
            let value = json!({ "lambdas": a.lambdas, "gamma_star": g });
            plain(Output::Json(value, format!("gamma* = {g}\n")), &a.out)
        }
        Command::Capacity(a) => {
            let ch: DiscreteChannel = read_json(&a.channel)?;
            let r = blahut_arimoto(&ch, a.gamma, &CAPACITY_TOL)?;
            let text = format!("capacity = {} bits (E[cost] = {})\n", r.capacity, r.expected_cost);
            Run { inputs: vec![a.channel.clone()], ..plain(Output::Json(serde_json::to_value(r)?, text), &a.out) }
        }
        Command::RlOt(a) => {
            let p: TransportProblem = read_json(&a.problem)?;
            let points = a
                .rate
                .iter()
                .map(|&r| rate_limited_ot(&p.row, &p.col, &p.cost, r, &Tolerance::tight()))
                .collect::<Result<Vec<_>>>()?;
            let text: String = points.iter().map(|q| format!("R = {}: D = {}\n", q.rate, q.distortion)).collect();
            Run { inputs: vec![a.problem.clone()], ..plain(Output::Json(json!({ "points": points }), text), &a.out) }
        }
        Command::Ot(a) => {
            let p: TransportProblem = read_json(&a.problem)?;
            let (d, plan) = ot_min_cost(&p.row, &p.col, &p.cost)?;
            let value = json!({ "d_star": d, "plan": plan.table });
            Run { inputs: vec![a.problem.clone()], ..plain(Output::Json(value, format!("d* = {d}\n")), &a.out) }
        }
        Command::HybridEval(a) => {
            let spec: HybridSpec = read_json(&a.spec)?;
            let r = evaluate(&spec)?;
            let text = format!(
                "E[d] = {}\nE[c] = {}\nI(X;Z) = {}  I(Y;Z) = {}  I(Z;V) = {}\nfeasible = {}\n",
                r.e_dist, r.e_cost, r.i_xz, r.i_yz, r.i_zv, r.feasible
            );
            Run { inputs: vec![a.spec.clone()], ..plain(Output::Json(serde_json::to_value(r)?, text), &a.out) }
        }
        Command::Simulate(s) => simulate(s)?,
        Command::EmitPlot(a) => {
            let figure: Figure = a.figure.parse()?;
            let table = CurveTable::load(&a.csv)?;
            let out = a.out.clone().unwrap_or_else(|| a.csv.with_file_name(format!("{figure}.gp")));
            let rel = relative_to(&a.csv, out.parent().unwrap_or(Path::new("")));
            let script = emit_plot_script(&table, &rel, figure)?;
            let json_text = pretty(&json!({ "figure": figure.id(), "script": out.display().to_string() }))?;
            Run { output: Output::Text(script, json_text), out: Some(out), seed: None, inputs: vec![a.csv.clone()] }
        }
    })
}

/// `path` as seen from `dir`, when `path` lies inside `dir`.
fn relative_to(path: &Path, dir: &Path) -> String {
    let abs = |p: &Path| std::path::absolute(p).ok();
    match (abs(path), abs(dir)) {
        (Some(p), Some(d)) => p.strip_prefix(&d).map_or(p.clone(), Path::to_path_buf).display().to_string(),
        _ => path.display().to_string(),
    }
}

fn simulate(cmd: &SimCommand) -> Result<Run> {
    let a = cmd.sim_args();
    let sim = SimConfig::new(a.seed, a.samples, workers(a.workers)?)?;
    let report: Value = match cmd {
        SimCommand::UncodedBinary { rho, theta, a: da, b: db, .. } => {
            let dec = match (da, db) {
                (Some(a), Some(b)) => UncodedDecoder { a: *a, b: *b },
                _ => binary::d_uncoded(*rho, *theta)?.1,
            };
            serde_json::to_value(sim::sim_uncoded_binary(*rho, *theta, dec, &sim)?)?
        }
        SimCommand::UncodedGaussian { lambdas, gamma, .. } => {
            serde_json::to_value(sim::sim_uncoded_gaussian(lambdas, *gamma, &sim)?)?
        }
        SimCommand::GenieHybrid { rho, theta, delta1, .. } => {
            serde_json::to_value(sim::sim_genie_hybrid_binary(*rho, *theta, *delta1, &sim)?)?
        }
        SimCommand::BlockHybrid { rho, theta, delta1, n, rate, typ_delta, codebooks, .. } => {
            let spec = binary::hybrid_spec(*rho, *theta, *delta1)?;
            let mut cfg = BlockCodeConfig::from_spec(&spec, *n, *rate)?;
            cfg.typ_delta = *typ_delta;
            cfg.codebooks = *codebooks;
            serde_json::to_value(sim::sim_block_hybrid(&cfg, &sim)?)?
        }
        SimCommand::LinearBound { lambdas, trials, .. } => {
            let r = sim::verify_linear_bound(lambdas, *trials, &sim)?;
            let text = format!(
                "{} trials, {} violations, max excess {:e}, equality residual {:e}\n",
                r.trials, r.violations, r.max_excess, r.equality_residual
            );
            return Ok(Run {
                output: Output::Json(serde_json::to_value(r)?, text),
                out: a.out.clone(),
                seed: Some(a.seed),
                inputs: vec![],
            });
        }
    };
    let r: SimReport = serde_json::from_value(report.clone())?;
    let mut text = format!(
        "{}: D = {} ± {} ({} samples, seed {})\n",
        r.scheme, r.mean_distortion, r.std_error, r.samples, r.seed
    );
    if let Some(tv) = r.tv_to_target {
        text.push_str(&format!("TV to target marginal = {tv}\n"));
    }
    if let Some(e) = r.msg_error_rate {
        text.push_str(&format!("message error rate = {e}\n"));
    }
    Ok(Run { output: Output::Json(report, text), out: a.out.clone(), seed: Some(a.seed), inputs: vec![] })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> std::result::Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("cot-lab").chain(args.iter().copied()))
    }

    #[test]
    fn parses_lists_and_flags() {
        let c = parse(&["gaussian-curves", "--lambdas", "1.5,0.5", "--log-grid", "--json"]).unwrap();
        assert!(c.json);
        match c.command {
            Command::GaussianCurves(a) => {
                assert_eq!(a.lambdas, vec![1.5, 0.5]);
                assert!(a.log_grid);
                assert_eq!(a.points, 256);
            }
            _ => panic!(),
        }
        assert!(parse(&["binary-curves"]).is_err());
        assert!(parse(&["binary-curves", "--rho", "0.25", "--bogus"]).is_err());
        assert!(parse(&["simulate", "uncoded-binary", "--rho", "0.5", "--theta", "0.1", "--a", "0"]).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["cot-lab", "binary-curves", "--rho", "0.6"]), 1);
        assert_eq!(run(["cot-lab", "no-such-command"]), 1);
        assert_eq!(run(["cot-lab", "--help"]), 0);
        assert_eq!(run(["cot-lab", "gamma-star", "--lambdas", "1.5,0.5"]), 0);
    }

    #[test]
    fn config_hash_ignores_output_paths() {
        let a = parse(&["binary-curves", "--rho", "0.25", "--out", "a.csv"]).unwrap();
        let b = parse(&["binary-curves", "--rho", "0.25", "--out", "b.csv"]).unwrap();
        let c = parse(&["binary-curves", "--rho", "0.3", "--out", "a.csv"]).unwrap();
        let h = |c: &Cli| serde_json::to_string(&c.command).unwrap();
        assert_eq!(h(&a), h(&b));
        assert_ne!(h(&a), h(&c));
    }

    #[test]
    fn manifest_next_to_output() {
        assert_eq!(manifest_path(Path::new("d/fig1.csv")), PathBuf::from("d/fig1.csv.manifest.json"));
    }

    #[test]
    fn relative_paths() {
        assert_eq!(relative_to(Path::new("out/fig1.csv"), Path::new("out")), "fig1.csv");
    }
}
