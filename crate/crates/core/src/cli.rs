//! `netcov` command-line front end.
//!
//! Every command is a pure function of its inputs, flags and seed. Parameters
//! may also come from a `key=value` file given with `--config`; flags on the
//! command line take precedence. On success a one-line JSON summary is printed
//! to stdout. Exit codes: 0 success, 2 invalid input, 3 numerical failure.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::bench::{desk_network, run_sim_study, StudyConfig, DEFAULT_RANGES, DEFAULT_REPLICATES, DEFAULT_TEST_FRACTION};
use crate::covariance::{network_covariance, CovarianceMethod, KernelKind, KernelSpec, PathOptions, DEFAULT_WEIGHT_FLOOR};
use crate::estimator::{estimate_network, EstimatorOptions, ParamsDoc, DEFAULT_BINS};
use crate::extremes::{excursion_sets, joint_exceedance, joint_exceedance_csv};
use crate::fields::{bias_correct, krige, read_ensemble, sample_gaussian, write_ensemble, BiasMode, KrigingMode};
use crate::io::{read_grid_file, read_matrix, read_network_file, write_matrix, write_network_file, IoError};
use crate::markov::MarkovSolution;
use crate::network::{build_network, classify_vertices, DirectedNetwork, EdgeMetric};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Lib(#[from] crate::Error),
    #[error(transparent)]
    Usage(#[from] clap::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Lib(e) if e.is_numerical() => EXIT_NUMERICAL,
            CliError::Usage(e) if !e.use_stderr() => EXIT_OK,
            _ => EXIT_VALIDATION,
        }
    }
}

macro_rules! lib_error_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Lib(e.into())
            }
        }
    )*};
}

lib_error_from!(
    IoError,
    crate::network::NetworkError,
    crate::markov::MarkovError,
    crate::covariance::CovarianceError,
    crate::estimator::EstimationError,
    crate::fields::FieldError,
    crate::extremes::ExtremesError,
    crate::bench::BenchError
);

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "netcov", version, about = "Flow-informed covariance models on directed networks")]
#[command(args_override_self = true)]
pub struct Cli {
    /// key=value file with default flag values (flags on the command line win).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the directed network from a velocity grid CSV.
    BuildNet(BuildNetArgs),
    /// Assemble the network covariance matrix.
    Covmat(CovmatArgs),
    /// Estimate sill, binned covariance and range from observed fields.
    Estimate(EstimateArgs),
    /// Draw a seeded Gaussian ensemble from fitted parameters.
    Simulate(SimulateArgs),
    /// Predict unobserved vertices by kriging.
    Krige(KrigeArgs),
    /// Joint exceedance and excursion sets of an ensemble.
    Extremes(ExtremesArgs),
    /// Desk-scale simulation study against the Euclidean baseline.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long, default_value = "exponential", value_parser = parse_kernel)]
    pub kernel: KernelKind,
    #[arg(long, value_parser = parse_positive)]
    pub sill: f64,
    #[arg(long, value_parser = parse_positive)]
    pub range: f64,
}

#[derive(Debug, Args)]
pub struct PathArgs {
    /// Path enumeration hop limit (default: four times the hop diameter).
    #[arg(long)]
    pub max_hops: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_WEIGHT_FLOOR, value_parser = parse_nonnegative)]
    pub weight_floor: f64,
}

impl PathArgs {
    fn options(&self) -> CliResult<PathOptions> {
        if self.max_hops == Some(0) {
            return Err(CliError::Validation("--max-hops must be at least 1".into()));
        }
        Ok(PathOptions { max_hops: self.max_hops, weight_floor: self.weight_floor })
    }
}

#[derive(Debug, Args)]
pub struct BuildNetArgs {
    #[arg(long)]
    pub grid: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "euclidean", value_parser = parse_metric)]
    pub edge_metric: EdgeMetric,
}

#[derive(Debug, Args)]
pub struct CovmatArgs {
    #[arg(long)]
    pub net: PathBuf,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long, default_value = "closed-form", value_parser = parse_method)]
    pub method: CovarianceMethod,
    #[command(flatten)]
    pub paths: PathArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub net: PathBuf,
    /// Grid CSV whose water values form a single observed field.
    #[arg(long, conflicts_with_all = ["fields", "projections"])]
    pub grid: Option<PathBuf>,
    /// Matrix file with one observed field per row.
    #[arg(long, conflicts_with = "projections")]
    pub fields: Option<PathBuf>,
    /// Matrix file of projected fields per year; requires `--observations`.
    #[arg(long, requires = "observations")]
    pub projections: Option<PathBuf>,
    /// Matrix file of observed fields per year, co-indexed with `--projections`.
    #[arg(long, requires = "projections")]
    pub observations: Option<PathBuf>,
    #[arg(long, default_value = "global", value_parser = parse_bias)]
    pub bias_mode: BiasMode,
    #[arg(long, default_value = "exponential", value_parser = parse_kernel)]
    pub kernel: KernelKind,
    #[arg(long, default_value_t = DEFAULT_BINS, value_parser = parse_count)]
    pub bins: usize,
    /// Ignore paths longer than this (km).
    #[arg(long, value_parser = parse_positive)]
    pub max_lag: Option<f64>,
    /// Known sill; skips estimation from unconnected pairs.
    #[arg(long, value_parser = parse_positive)]
    pub sill: Option<f64>,
    #[command(flatten)]
    pub paths: PathArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub net: PathBuf,
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long, value_parser = parse_count)]
    pub m: usize,
    #[arg(long)]
    pub seed: u64,
    /// Constant mean of the field.
    #[arg(long, default_value_t = 0.0)]
    pub mean: f64,
    /// Covariance method (default: closed form for the exponential kernel).
    #[arg(long, value_parser = parse_method)]
    pub method: Option<CovarianceMethod>,
    #[command(flatten)]
    pub paths: PathArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct KrigeArgs {
    #[arg(long)]
    pub net: PathBuf,
    #[arg(long)]
    pub params: PathBuf,
    /// CSV with header `vertex,value`.
    #[arg(long)]
    pub obs: PathBuf,
    #[arg(long, default_value = "simple", value_parser = parse_mode)]
    pub mode: KrigingMode,
    /// Known constant mean (simple mode).
    #[arg(long, default_value_t = 0.0)]
    pub mean: f64,
    #[arg(long, value_parser = parse_method)]
    pub method: Option<CovarianceMethod>,
    #[command(flatten)]
    pub paths: PathArgs,
    /// CSV with columns `vertex,prediction,variance` for every unobserved vertex.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExtremesArgs {
    #[arg(long)]
    pub net: PathBuf,
    #[arg(long)]
    pub ensemble: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub threshold: f64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Center `x,y` of the joint exceedance neighborhoods.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub center: Option<[f64; 2]>,
    #[arg(long, value_delimiter = ',', default_value = "0,10,15,20,30,50")]
    pub radii: Vec<f64>,
    /// Excursion sets JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// Joint exceedance CSV (requires `--center`).
    #[arg(long, requires = "center")]
    pub out_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Network JSON (default: the built-in desk network).
    #[arg(long)]
    pub net: Option<PathBuf>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_REPLICATES, value_parser = parse_count)]
    pub replicates: usize,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_RANGES.to_vec())]
    pub ranges: Vec<f64>,
    #[arg(long, default_value_t = 1.0, value_parser = parse_positive)]
    pub sill: f64,
    #[arg(long, default_value_t = DEFAULT_TEST_FRACTION)]
    pub test_fraction: f64,
    #[arg(long, default_value_t = DEFAULT_BINS, value_parser = parse_count)]
    pub bins: usize,
    /// Per-replicate records CSV.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub out_json: Option<PathBuf>,
}

fn parse_positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("must be positive, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_nonnegative(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("must be nonnegative, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_count(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_kernel(s: &str) -> Result<KernelKind, String> {
    s.parse().map_err(|e: crate::covariance::CovarianceError| e.to_string())
}

fn parse_method(s: &str) -> Result<CovarianceMethod, String> {
    s.parse().map_err(|e: crate::covariance::CovarianceError| e.to_string())
}

fn parse_mode(s: &str) -> Result<KrigingMode, String> {
    s.parse().map_err(|e: crate::fields::FieldError| e.to_string())
}

fn parse_bias(s: &str) -> Result<BiasMode, String> {
    s.parse().map_err(|e: crate::fields::FieldError| e.to_string())
}

fn parse_metric(s: &str) -> Result<EdgeMetric, String> {
    match s {
        "euclidean" => Ok(EdgeMetric::Euclidean),
        "time" => Ok(EdgeMetric::Time),
        other => Err(format!("unknown edge metric `{other}`")),
    }
}

fn parse_point(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected `x,y`, got `{s}`"));
    }
    let x = parts[0].trim().parse::<f64>().map_err(|e| e.to_string())?;
    let y = parts[1].trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok([x, y])
}

const SUBCOMMANDS: [&str; 7] = ["build-net", "covmat", "estimate", "simulate", "krige", "extremes", "bench"];

/// Reads `key=value` lines (`#` comments, blank lines ignored) into flags.
/// A value of `true` turns into a bare switch.
pub fn config_to_args(text: &str) -> CliResult<Vec<String>> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Validation(format!("config line {}: expected key=value", k + 1)));
        };
        let key = key.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(CliError::Validation(format!("config line {}: invalid key", k + 1)));
        }
        out.push(format!("--{key}"));
        let value = value.trim();
        if value != "true" {
            out.push(value.to_string());
        }
    }
    Ok(out)
}

/// Inserts config-file flags right after the subcommand so that explicit
/// flags, which come later, override them.
fn expand_config(args: Vec<String>) -> CliResult<Vec<String>> {
    let mut config = None;
    let mut rest = Vec::with_capacity(args.len());
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            let path = it.next().ok_or_else(|| CliError::Validation("--config needs a file".into()))?;
            config = Some(path);
        } else if let Some(path) = a.strip_prefix("--config=") {
            config = Some(path.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = config else { return Ok(rest) };
    let text = fs::read_to_string(&path).map_err(|e| CliError::Validation(format!("{path}: {e}")))?;
    let extra = config_to_args(&text)?;
    let pos = rest.iter().position(|a| SUBCOMMANDS.contains(&a.as_str())).map_or(rest.len(), |p| p + 1);
    rest.splice(pos..pos, extra);
    Ok(rest)
}

fn load_network(path: &Path) -> CliResult<(DirectedNetwork, MarkovSolution)> {
    let net = read_network_file(path)?;
    let markov = MarkovSolution::solve(&net)?;
    Ok((net, markov))
}

fn read_params(path: &Path) -> CliResult<ParamsDoc> {
    let text = fs::read_to_string(path).map_err(|e| IoError::file(path, e))?;
    let doc: ParamsDoc = serde_json::from_str(&text).map_err(IoError::from)?;
    Ok(doc)
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| IoError::file(path, e))?;
    Ok(())
}

fn pretty(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn params_covariance(
    net: &DirectedNetwork,
    markov: &MarkovSolution,
    params: &ParamsDoc,
    method: Option<CovarianceMethod>,
    paths: &PathArgs,
) -> CliResult<(KernelSpec, DMatrix<f64>)> {
    let kernel = params.kernel_spec()?;
    let method = method.unwrap_or(match kernel.kind {
        KernelKind::Exponential => CovarianceMethod::ClosedForm,
        _ => CovarianceMethod::PathSum,
    });
    let (cov, _) = network_covariance(net, markov, &kernel, method, &paths.options()?)?;
    Ok((kernel, cov))
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

fn build_net(a: &BuildNetArgs) -> CliResult<Value> {
    let grid = read_grid_file(&a.grid)?;
    let net = build_network(&grid, a.edge_metric)?;
    write_network_file(&a.out, &net)?;
    let classes = classify_vertices(&net);
    Ok(json!({
        "command": "build-net",
        "out": a.out,
        "vertices": net.len(),
        "edges": net.edges().len(),
        "sources": classes.sources.len(),
        "outlets": classes.outlets.len(),
    }))
}

fn covmat(a: &CovmatArgs) -> CliResult<Value> {
    let (net, markov) = load_network(&a.net)?;
    let kernel = KernelSpec::new(a.kernel.kernel, a.kernel.sill, a.kernel.range)?;
    let (cov, report) = network_covariance(&net, &markov, &kernel, a.method, &a.paths.options()?)?;
    let mut meta = serde_json::Map::new();
    meta.insert("kernel".into(), json!(kernel));
    meta.insert("method".into(), json!(a.method));
    if let Some(r) = &report {
        meta.insert("truncation".into(), json!(r));
    }
    write_matrix(&a.out, &cov, meta)?;
    Ok(json!({
        "command": "covmat",
        "out": a.out,
        "n": net.len(),
        "method": a.method,
        "truncation_unbounded": report.is_some_and(|r| r.unbounded()),
    }))
}

fn estimate(a: &EstimateArgs) -> CliResult<Value> {
    let (net, markov) = load_network(&a.net)?;
    let replicates: Vec<Vec<f64>> = if let Some(grid) = &a.grid {
        let values = read_grid_file(grid)?.water_values();
        if values.len() != net.len() {
            return Err(CliError::Validation(format!("grid has {} water nodes, network {} vertices", values.len(), net.len())));
        }
        let z: Option<Vec<f64>> = values.into_iter().collect();
        vec![z.ok_or_else(|| CliError::Validation("every water node needs an observed value".into()))?]
    } else if let Some(fields) = &a.fields {
        matrix_rows(&read_matrix(fields)?.0)
    } else if let (Some(p), Some(o)) = (&a.projections, &a.observations) {
        let proj = matrix_rows(&read_matrix(p)?.0);
        let obs = matrix_rows(&read_matrix(o)?.0);
        bias_correct(&proj, &obs, a.bias_mode)?.residuals
    } else {
        return Err(CliError::Validation("one of --grid, --fields or --projections/--observations is required".into()));
    };
    let opts = EstimatorOptions {
        kind: a.kernel,
        bins: a.bins,
        paths: a.paths.options()?,
        max_lag: a.max_lag,
        sill: a.sill,
    };
    let fit = estimate_network(&net, &markov, &replicates, None, &opts)?;
    write_text(&a.out, &pretty(&fit.params()))?;
    Ok(json!({
        "command": "estimate",
        "out": a.out,
        "kernel": fit.kind,
        "theta_s": fit.theta_s,
        "theta_r": fit.theta_r,
        "lambda": fit.lambda,
        "bins": fit.bins.len(),
        "replicates": replicates.len(),
        "degenerate": fit.diagnostics.range_degenerate,
    }))
}

fn simulate(a: &SimulateArgs) -> CliResult<Value> {
    let (net, markov) = load_network(&a.net)?;
    let params = read_params(&a.params)?;
    let (kernel, cov) = params_covariance(&net, &markov, &params, a.method, &a.paths)?;
    let ens = sample_gaussian(&vec![a.mean; net.len()], &cov, a.m, a.seed)?;
    write_ensemble(&a.out, &ens, json!({ "kernel": kernel, "mean": a.mean }))?;
    Ok(json!({ "command": "simulate", "out": a.out, "m": a.m, "n": net.len(), "seed": a.seed }))
}

fn read_observations(path: &Path, n: usize) -> CliResult<(Vec<usize>, Vec<f64>)> {
    let text = fs::read_to_string(path).map_err(|e| IoError::file(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader.headers().map_err(IoError::from)?.clone();
    if header.iter().collect::<Vec<_>>() != ["vertex", "value"] {
        return Err(CliError::Validation(format!("{}: expected header `vertex,value`", path.display())));
    }
    let (mut idx, mut vals) = (Vec::new(), Vec::new());
    for (k, rec) in reader.records().enumerate() {
        let rec = rec.map_err(IoError::from)?;
        let line = k + 2;
        let bad = |m: &str| CliError::Validation(format!("{} line {line}: {m}", path.display()));
        let v: usize = rec.get(0).and_then(|s| s.parse().ok()).ok_or_else(|| bad("invalid vertex"))?;
        let z: f64 = rec.get(1).and_then(|s| s.parse().ok()).filter(|z: &f64| z.is_finite()).ok_or_else(|| bad("invalid value"))?;
        if v >= n {
            return Err(bad("vertex outside the network"));
        }
        if idx.contains(&v) {
            return Err(bad("duplicate vertex"));
        }
        idx.push(v);
        vals.push(z);
    }
    Ok((idx, vals))
}

fn krige_cmd(a: &KrigeArgs) -> CliResult<Value> {
    let (net, markov) = load_network(&a.net)?;
    let params = read_params(&a.params)?;
    let (obs_idx, obs_vals) = read_observations(&a.obs, net.len())?;
    let (_, cov) = params_covariance(&net, &markov, &params, a.method, &a.paths)?;
    let targets: Vec<usize> = (0..net.len()).filter(|v| !obs_idx.contains(v)).collect();
    let res = krige(&cov, &vec![a.mean; net.len()], &obs_idx, &obs_vals, &targets, a.mode)?;
    let mut out = String::from("vertex,prediction,variance\n");
    for ((t, p), v) in res.targets.iter().zip(&res.predictions).zip(&res.variances) {
        out.push_str(&format!("{t},{p},{v}\n"));
    }
    write_text(&a.out, &out)?;
    Ok(json!({ "command": "krige", "out": a.out, "observed": obs_idx.len(), "predicted": targets.len(), "mode": a.mode }))
}

fn extremes(a: &ExtremesArgs) -> CliResult<Value> {
    let net = read_network_file(&a.net)?;
    let ens = read_ensemble(&a.ensemble)?;
    if ens.n() != net.len() {
        return Err(CliError::Validation(format!("ensemble has {} vertices, network {}", ens.n(), net.len())));
    }
    let sets = excursion_sets(&ens, a.threshold, a.alpha)?;
    write_text(&a.out, &pretty(&sets))?;
    if let (Some(csv_path), Some(center)) = (&a.out_csv, a.center) {
        let rows = joint_exceedance(&ens, &net.coords(), center, &a.radii, a.threshold)?;
        write_text(csv_path, &joint_exceedance_csv(&rows))?;
    }
    Ok(json!({
        "command": "extremes",
        "out": a.out,
        "inner": sets.inner.len(),
        "outer": sets.outer.len(),
        "inner_containment": sets.inner_containment,
        "outer_containment": sets.outer_containment,
    }))
}

fn bench(a: &BenchArgs) -> CliResult<Value> {
    let net = match &a.net {
        Some(p) => read_network_file(p)?,
        None => desk_network()?,
    };
    let config = StudyConfig {
        ranges: a.ranges.clone(),
        sill: a.sill,
        replicates: a.replicates,
        test_fraction: a.test_fraction,
        bins: a.bins,
        seed: a.seed,
    };
    let report = run_sim_study(&net, &config)?;
    write_text(&a.out, &report.to_csv())?;
    if let Some(p) = &a.out_json {
        write_text(p, &pretty(&report.summary_json()))?;
    }
    Ok(json!({ "command": "bench", "out": a.out, "records": report.records.len(), "vertices": report.vertices }))
}

fn execute(cli: &Cli) -> CliResult<Value> {
    match &cli.command {
        Command::BuildNet(a) => build_net(a),
        Command::Covmat(a) => covmat(a),
        Command::Estimate(a) => estimate(a),
        Command::Simulate(a) => simulate(a),
        Command::Krige(a) => krige_cmd(a),
        Command::Extremes(a) => extremes(a),
        Command::Bench(a) => bench(a),
    }
}

/// Parses arguments (program name first) and runs the command.
pub fn run(args: Vec<String>) -> CliResult<Value> {
    let args = expand_config(args)?;
    let cli = Cli::try_parse_from(args)?;
    match cli.threads {
        Some(0) => Err(CliError::Validation("--threads must be at least 1".into())),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
            pool.install(|| execute(&cli))
        }
        None => execute(&cli),
    }
}

/// Runs the command, prints the summary or the error, and returns the exit code.
pub fn dispatch(args: Vec<String>) -> i32 {
    match run(args) {
        Ok(summary) => {
            println!("{summary}");
            EXIT_OK
        }
        Err(CliError::Usage(e)) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
