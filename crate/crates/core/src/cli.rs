//! Command-line interface: graph generation, coherence reports, single
//! recovery runs, and Monte-Carlo benchmarks.
//!
//! Result payloads go to stdout (or `--out`); diagnostics go to stderr.
//! Exit codes: 0 success, 1 runtime error, 2 usage error.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use ndarray::Array1;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::bench::{
    f_score, mse_normalized, run_experiment, subset_count, BenchError, ExperimentSpec,
    ENUMERATION_CAP,
};
use crate::coherence::{laplacian_coherence, CoherenceError};
use crate::filter::{
    build_filter, draw_support, simulate_instance, FilterError, GraphFilter, Scenario, ValueDist,
};
use crate::gic::{GicConfig, GicError, GicEvaluator};
use crate::graph::{
    cycle, erdos_renyi, grid2d, laplacian, load_edge_list, path, save_edge_list, sbm,
    GeodesicTable, Graph, GraphError,
};
use crate::recovery::{
    exhaustive_gic, gfoc, gm_gic, graph_bnb_gic, lasso, omp, LassoSettings, RecoveryError,
    RecoveryResult,
};
use crate::support::SupportSet;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Gic(#[from] GicError),
    #[error(transparent)]
    Recovery(#[from] RecoveryError),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error(transparent)]
    Coherence(#[from] CoherenceError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad graph spec '{spec}': {msg} (try cycle:6, path:5, grid2d:4x5, er:70:0.1, sbm:2:70:0.0857:2)")]
    GraphSpecArg { spec: String, msg: String },
    #[error("bad --coeffs: {0}")]
    Coeffs(String),
    #[error("measurement line {line}: {msg}")]
    Measurement { line: usize, msg: String },
    #[error("measurement has {got} values but the graph has {want} nodes")]
    MeasurementLength { got: usize, want: usize },
    #[error("--coeffs gives order {coeff_order} but --psi is {psi}; they must agree")]
    OrderMismatch { coeff_order: usize, psi: usize },
}

#[derive(Parser, Debug)]
#[command(
    name = "gsr",
    version,
    about = "Sparse graph-signal support recovery from graph-filter observations"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a graph and print it as an edge list.
    GenGraph(GenGraphArgs),
    /// Mutual coherence of a graph's Laplacian columns, with degree bounds.
    Coherence(CoherenceArgs),
    /// Recover a sparse support from one observation (given or simulated).
    Solve(SolveArgs),
    /// Run a Monte-Carlo experiment from a JSON spec.
    Bench(BenchArgs),
}

#[derive(clap::Args, Debug)]
#[command(group(ArgGroup::new("topology").required(true).args(["graph", "edge_list"])))]
struct GenGraphArgs {
    /// Graph family spec, e.g. cycle:6, grid2d:4x5, er:70:0.1, sbm:2:70:0.0857:2.
    #[arg(long)]
    graph: Option<String>,
    /// Copy an existing edge-list file (validates and canonicalizes it).
    #[arg(long)]
    edge_list: Option<PathBuf>,
    /// Seed for random families (er, sbm).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
#[command(group(ArgGroup::new("topology").required(true).args(["graph", "edge_list"])))]
struct CoherenceArgs {
    #[arg(long)]
    graph: Option<String>,
    #[arg(long)]
    edge_list: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum MethodArg {
    Exhaustive,
    GmGic,
    GBnb,
    Omp,
    Lasso,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ScenarioArg {
    Localized,
    Mixed,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ValueDistArg {
    StdNormal,
    UniformSplit,
}

#[derive(clap::Args, Debug)]
#[command(group(ArgGroup::new("topology").required(true).args(["graph", "edge_list"])))]
#[command(group(ArgGroup::new("observation").required(true).args(["measurement", "snr_db"])))]
#[command(group(ArgGroup::new("order").required(true).multiple(true).args(["psi", "coeffs"])))]
struct SolveArgs {
    #[arg(long)]
    graph: Option<String>,
    #[arg(long)]
    edge_list: Option<PathBuf>,
    /// Filter order; coefficients default to all ones.
    #[arg(long)]
    psi: Option<usize>,
    /// Comma-separated polynomial coefficients, lowest order first.
    #[arg(long)]
    coeffs: Option<String>,
    /// Rescale the operator's largest eigenvalue to this value.
    #[arg(long)]
    normalize_eig: Option<f64>,
    /// Maximum support cardinality.
    #[arg(long)]
    sparsity: usize,
    /// Noise standard deviation.
    #[arg(long, default_value_t = 0.01)]
    sigma: f64,
    /// Screening threshold override (defaults to sigma).
    #[arg(long)]
    zeta: Option<f64>,
    #[arg(long, value_enum, default_value = "gm-gic")]
    method: MethodArg,
    /// Append a first-order-correction pass to the chosen method.
    #[arg(long)]
    gfoc: bool,
    /// Swap-candidate hop radius for the correction pass.
    #[arg(long, default_value_t = 1)]
    gfoc_radius: usize,
    /// Lasso regularization weight.
    #[arg(long)]
    lambda: Option<f64>,
    /// Seed for graph generation and simulation.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// File with one observation value per line (# comments allowed).
    #[arg(long)]
    measurement: Option<PathBuf>,
    /// Simulate an instance at this SNR (dB) instead of reading one.
    #[arg(long)]
    snr_db: Option<f64>,
    #[arg(long, value_enum, default_value = "localized")]
    scenario: ScenarioArg,
    #[arg(long, value_enum, default_value = "std-normal")]
    value_dist: ValueDistArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ReportFormat {
    Csv,
    Json,
}

#[derive(clap::Args, Debug)]
struct BenchArgs {
    /// Experiment spec (JSON file).
    #[arg(long)]
    spec: PathBuf,
    /// Worker threads; 0 picks the rayon default.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: ReportFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses argv, dispatches, and returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::GenGraph(args) => gen_graph_cmd(args),
        Command::Coherence(args) => coherence_cmd(args),
        Command::Solve(args) => solve_cmd(args),
        Command::Bench(args) => bench_cmd(args),
    }
}

/// A graph family named on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphArg {
    Cycle(usize),
    Path(usize),
    Grid2d(usize, usize),
    ErdosRenyi(usize, f64),
    Sbm { clusters: usize, per_cluster: usize, p_within: f64, link_nodes: usize },
}

/// Parses specs like `cycle:6`, `grid2d:4x5`, `er:70:0.1`, `sbm:2:70:0.0857:2`.
pub fn parse_graph_arg(spec: &str) -> Result<GraphArg, CliError> {
    let err = |msg: &str| CliError::GraphSpecArg { spec: spec.to_string(), msg: msg.to_string() };
    let parts: Vec<&str> = spec.split(':').collect();
    let int = |s: &str, what: &str| {
        s.parse::<usize>().map_err(|_| err(&format!("{what} '{s}' is not an integer")))
    };
    let real = |s: &str, what: &str| {
        s.parse::<f64>().map_err(|_| err(&format!("{what} '{s}' is not a number")))
    };
    match parts.as_slice() {
        ["cycle", n] => Ok(GraphArg::Cycle(int(n, "node count")?)),
        ["path", n] => Ok(GraphArg::Path(int(n, "node count")?)),
        ["grid2d", dims] => {
            let (r, c) = dims
                .split_once('x')
                .ok_or_else(|| err("grid2d wants ROWSxCOLS, e.g. grid2d:4x5"))?;
            Ok(GraphArg::Grid2d(int(r, "rows")?, int(c, "cols")?))
        }
        ["er", n, p] => Ok(GraphArg::ErdosRenyi(int(n, "node count")?, real(p, "edge probability")?)),
        ["sbm", k, per, p, link] => Ok(GraphArg::Sbm {
            clusters: int(k, "cluster count")?,
            per_cluster: int(per, "cluster size")?,
            p_within: real(p, "intra-cluster probability")?,
            link_nodes: int(link, "link node count")?,
        }),
        _ => Err(err("unknown family or wrong argument count")),
    }
}

pub fn build_graph_arg(arg: &GraphArg, seed: u64) -> Result<Graph, GraphError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match *arg {
        GraphArg::Cycle(n) => cycle(n),
        GraphArg::Path(n) => path(n),
        GraphArg::Grid2d(r, c) => grid2d(r, c),
        GraphArg::ErdosRenyi(n, p) => erdos_renyi(n, p, &mut rng),
        GraphArg::Sbm { clusters, per_cluster, p_within, link_nodes } => {
            sbm(clusters, per_cluster, p_within, link_nodes, &mut rng)
        }
    }
}

fn load_graph(
    graph: &Option<String>,
    edge_list: &Option<PathBuf>,
    seed: u64,
) -> Result<Graph, CliError> {
    match (graph, edge_list) {
        (Some(spec), None) => Ok(build_graph_arg(&parse_graph_arg(spec)?, seed)?),
        (None, Some(path)) => Ok(load_edge_list(&std::fs::read_to_string(path)?)?),
        _ => unreachable!("clap enforces exactly one topology source"),
    }
}

/// One observation value per line; blank lines and `#` comments are skipped.
pub fn parse_measurement(text: &str) -> Result<Vec<f64>, CliError> {
    let mut values = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| CliError::Measurement { line: idx + 1, msg: format!("'{line}' is not a number") })?;
        values.push(v);
    }
    Ok(values)
}

fn write_out(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn gen_graph_cmd(args: GenGraphArgs) -> Result<(), CliError> {
    let g = load_graph(&args.graph, &args.edge_list, args.seed)?;
    eprintln!("generated graph: {} nodes, {} edges", g.node_count(), g.edge_count());
    write_out(&args.out, &save_edge_list(&g))
}

fn coherence_cmd(args: CoherenceArgs) -> Result<(), CliError> {
    let g = load_graph(&args.graph, &args.edge_list, args.seed)?;
    let report = laplacian_coherence(&g)?;
    write_out(&args.out, &serde_json::to_string_pretty(&report)?)
}

fn bench_cmd(args: BenchArgs) -> Result<(), CliError> {
    let spec = ExperimentSpec::from_json(&std::fs::read_to_string(&args.spec)?)?;
    let report = run_experiment(&spec, args.jobs)?;
    let text = match args.format {
        ReportFormat::Csv => report.to_csv_string()?,
        ReportFormat::Json => report.to_json_string()?,
    };
    write_out(&args.out, &text)
}

/// Everything `solve` reports: the base run, the optional corrected run, and
/// ground-truth metrics when the instance was simulated.
#[derive(Debug, Serialize)]
pub struct SolveOutput {
    pub nodes: usize,
    pub sparsity: usize,
    pub sigma_n: f64,
    pub base: RecoveryResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corrected: Option<RecoveryResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truth: Option<SupportSet>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fscore_base: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fscore_corrected: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mse_base: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mse_corrected: Option<f64>,
}

fn solve_cmd(args: SolveArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let graph = load_graph(&args.graph, &args.edge_list, args.seed)?;
    let table = graph.geodesic_table();

    let coeffs = match (&args.coeffs, args.psi) {
        (Some(text), psi) => {
            let parsed: Result<Vec<f64>, _> =
                text.split(',').map(|t| t.trim().parse::<f64>()).collect();
            let parsed = parsed.map_err(|e| CliError::Coeffs(e.to_string()))?;
            if parsed.len() < 2 {
                return Err(CliError::Coeffs("need at least two coefficients".into()));
            }
            if let Some(psi) = psi {
                if parsed.len() != psi + 1 {
                    return Err(CliError::OrderMismatch { coeff_order: parsed.len() - 1, psi });
                }
            }
            parsed
        }
        (None, Some(psi)) => vec![1.0; psi + 1],
        (None, None) => unreachable!("clap enforces psi or coeffs"),
    };

    let gso = laplacian(&graph, false);
    let gso = match args.normalize_eig {
        Some(target) => gso.normalized_to_max_eigenvalue(target)?,
        None => gso,
    };
    let filter = Arc::new(build_filter(&gso, &coeffs, &table)?);

    let (y, truth, x_true) = observation(&args, &graph, &filter)?;
    let mut ev = GicEvaluator::new(Arc::clone(&filter), y);
    let mut cfg = GicConfig::new(args.sparsity, args.sigma);
    if let Some(z) = args.zeta {
        cfg = cfg.with_zeta(z);
    }

    if args.method == MethodArg::Exhaustive {
        let subsets = subset_count(graph.node_count(), args.sparsity);
        if subsets > ENUMERATION_CAP {
            return Err(BenchError::EnumerationTooLarge {
                n: graph.node_count(),
                s: args.sparsity,
                subsets,
                cap: ENUMERATION_CAP,
            }
            .into());
        }
    }

    let base = run_method(&args, &mut ev, &cfg, &table)?;
    let corrected = if args.gfoc {
        Some(gfoc(&mut ev, &cfg, &table, &base.support, args.gfoc_radius)?)
    } else {
        None
    };

    let fscore = |r: &RecoveryResult| truth.as_ref().map(|t| f_score(t, &r.support));
    let mse = |r: &RecoveryResult| {
        x_true.as_ref().map(|x| mse_normalized(x, &r.support, &r.x_hat))
    };
    let output = SolveOutput {
        nodes: graph.node_count(),
        sparsity: args.sparsity,
        sigma_n: args.sigma,
        fscore_base: fscore(&base),
        fscore_corrected: corrected.as_ref().and_then(|c| fscore(c)),
        mse_base: mse(&base),
        mse_corrected: corrected.as_ref().and_then(|c| mse(c)),
        truth,
        base,
        corrected,
    };
    let final_result = output.corrected.as_ref().unwrap_or(&output.base);
    eprintln!(
        "{}: support {} gic {:.6} evals {} in {:.3}s",
        final_result.method,
        final_result.support,
        final_result.gic_value,
        final_result.evals,
        started.elapsed().as_secs_f64()
    );
    write_out(&args.out, &serde_json::to_string_pretty(&output)?)
}

fn observation(
    args: &SolveArgs,
    graph: &Graph,
    filter: &Arc<GraphFilter>,
) -> Result<(Array1<f64>, Option<SupportSet>, Option<Array1<f64>>), CliError> {
    match (&args.measurement, args.snr_db) {
        (Some(path), None) => {
            let values = parse_measurement(&std::fs::read_to_string(path)?)?;
            if values.len() != graph.node_count() {
                return Err(CliError::MeasurementLength {
                    got: values.len(),
                    want: graph.node_count(),
                });
            }
            Ok((Array1::from(values), None, None))
        }
        (None, Some(snr_db)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            rng.set_stream(1);
            let scenario = match args.scenario {
                ScenarioArg::Localized => Scenario::Localized,
                ScenarioArg::Mixed => Scenario::Mixed,
            };
            let dist = match args.value_dist {
                ValueDistArg::StdNormal => ValueDist::StdNormal,
                ValueDistArg::UniformSplit => ValueDist::UniformSplit,
            };
            let support = draw_support(graph, scenario, args.sparsity, &mut rng)?;
            let inst =
                simulate_instance(filter, &support, dist, snr_db, args.sigma, false, &mut rng)?;
            Ok((inst.y, Some(inst.support), Some(inst.x)))
        }
        _ => unreachable!("clap enforces exactly one observation source"),
    }
}

fn run_method(
    args: &SolveArgs,
    ev: &mut GicEvaluator,
    cfg: &GicConfig,
    table: &GeodesicTable,
) -> Result<RecoveryResult, CliError> {
    Ok(match args.method {
        MethodArg::Exhaustive => exhaustive_gic(ev, cfg, None)?,
        MethodArg::GmGic => gm_gic(ev, cfg, table)?,
        MethodArg::GBnb => graph_bnb_gic(ev, cfg, None)?,
        MethodArg::Omp => omp(ev, cfg)?,
        MethodArg::Lasso => {
            let settings = LassoSettings {
                lambda: args.lambda.unwrap_or_else(|| LassoSettings::default().lambda),
                ..LassoSettings::default()
            };
            lasso(ev, cfg, &settings)?
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_specs_parse() {
        assert_eq!(parse_graph_arg("cycle:6").unwrap(), GraphArg::Cycle(6));
        assert_eq!(parse_graph_arg("path:5").unwrap(), GraphArg::Path(5));
        assert_eq!(parse_graph_arg("grid2d:4x5").unwrap(), GraphArg::Grid2d(4, 5));
        assert_eq!(parse_graph_arg("er:70:0.1").unwrap(), GraphArg::ErdosRenyi(70, 0.1));
        assert_eq!(
            parse_graph_arg("sbm:2:70:0.0857:2").unwrap(),
            GraphArg::Sbm { clusters: 2, per_cluster: 70, p_within: 0.0857, link_nodes: 2 }
        );
        assert!(parse_graph_arg("torus:6").is_err());
        assert!(parse_graph_arg("cycle:six").is_err());
        assert!(parse_graph_arg("grid2d:4:5").is_err());
        assert!(parse_graph_arg("er:70").is_err());
    }

    #[test]
    fn built_graphs_match_families() {
        let g = build_graph_arg(&parse_graph_arg("cycle:6").unwrap(), 0).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (6, 6));
        let g = build_graph_arg(&parse_graph_arg("grid2d:3x3").unwrap(), 0).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (9, 12));
        let a = build_graph_arg(&parse_graph_arg("er:20:0.3").unwrap(), 9).unwrap();
        let b = build_graph_arg(&parse_graph_arg("er:20:0.3").unwrap(), 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn measurements_parse_with_comments() {
        let text = "# header\n3.0\n\n-1.5\n 0.25 \n";
        assert_eq!(parse_measurement(text).unwrap(), vec![3.0, -1.5, 0.25]);
        let err = parse_measurement("1.0\nnope\n").unwrap_err();
        assert!(matches!(err, CliError::Measurement { line: 2, .. }));
    }

    #[test]
    fn clap_groups_enforce_sources() {
        // Missing topology: usage error.
        assert!(Cli::try_parse_from(["gsr", "solve", "--sparsity", "2", "--psi", "1", "--snr-db", "20"]).is_err());
        // Missing observation source.
        assert!(Cli::try_parse_from([
            "gsr", "solve", "--graph", "cycle:6", "--sparsity", "2", "--psi", "1"
        ])
        .is_err());
        // Both observation sources at once.
        assert!(Cli::try_parse_from([
            "gsr", "solve", "--graph", "cycle:6", "--sparsity", "2", "--psi", "1", "--snr-db",
            "20", "--measurement", "y.txt"
        ])
        .is_err());
        // Missing both psi and coeffs.
        assert!(Cli::try_parse_from([
            "gsr", "solve", "--graph", "cycle:6", "--sparsity", "2", "--snr-db", "20"
        ])
        .is_err());
        // A complete invocation parses.
        assert!(Cli::try_parse_from([
            "gsr", "solve", "--graph", "cycle:6", "--sparsity", "2", "--psi", "1", "--snr-db",
            "20", "--method", "g-bnb", "--gfoc"
        ])
        .is_ok());
        // psi and coeffs may both appear (validated later for consistency).
        assert!(Cli::try_parse_from([
            "gsr", "solve", "--graph", "cycle:6", "--sparsity", "1", "--psi", "1", "--coeffs",
            "1,1", "--snr-db", "20"
        ])
        .is_ok());
    }

    #[test]
    fn solve_reports_coeff_order_mismatch() {
        let cli = Cli::try_parse_from([
            "gsr", "solve", "--graph", "cycle:6", "--sparsity", "1", "--psi", "2", "--coeffs",
            "1,1", "--snr-db", "20",
        ])
        .unwrap();
        let err = dispatch(cli).unwrap_err();
        assert!(matches!(err, CliError::OrderMismatch { coeff_order: 1, psi: 2 }));
    }

    #[test]
    fn solve_runs_end_to_end_in_process() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("result.json");
        let cli = Cli::try_parse_from([
            "gsr",
            "solve",
            "--graph",
            "cycle:6",
            "--sparsity",
            "1",
            "--psi",
            "1",
            "--snr-db",
            "25",
            "--method",
            "exhaustive",
            "--gfoc",
            "--out",
            out.to_str().unwrap(),
        ])
        .unwrap();
        dispatch(cli).unwrap();
        let text = std::fs::read_to_string(&out).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["nodes"], 6);
        assert_eq!(parsed["base"]["method"], "exhaustive");
        assert_eq!(parsed["corrected"]["method"], "gfoc");
        assert!(parsed["truth"].is_array());
        assert!(parsed["fscore_base"].is_number());
    }

    #[test]
    fn exhaustive_guard_blocks_large_solves() {
        let cli = Cli::try_parse_from([
            "gsr", "solve", "--graph", "er:300:0.05", "--sparsity", "4", "--psi", "1", "--snr-db",
            "20", "--method", "exhaustive",
        ])
        .unwrap();
        let err = dispatch(cli).unwrap_err();
        assert!(matches!(err, CliError::Bench(BenchError::EnumerationTooLarge { .. })));
    }
}
