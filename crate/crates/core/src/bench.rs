//! Monte-Carlo benchmark harness: declarative experiment specs, seeded
//! trial execution across a one-dimensional parameter sweep, and aggregated
//! support-recovery metrics per method.
//!
//! Reproducibility contract: every (grid point, trial) pair derives its own
//! counter-mode RNG stream from the experiment seed, so results are
//! byte-identical regardless of thread count or scheduling.

use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::filter::{
    build_filter, draw_support, simulate_instance, FilterError, GraphFilter, Instance, Scenario,
    ValueDist,
};
use crate::gic::{GicConfig, GicEvaluator};
use crate::graph::{
    adjacency_operator, cycle, erdos_renyi, grid2d, laplacian, load_edge_list, path, sbm,
    GeodesicTable, Graph, GraphError, GsoKind,
};
use crate::recovery::{
    exhaustive_gic, gfoc, gm_gic, graph_bnb_gic, lasso, omp, LassoSettings, RecoveryResult,
};
use crate::support::SupportSet;
use ndarray::Array1;

/// Refuse exhaustive enumeration beyond this many candidate subsets.
pub const ENUMERATION_CAP: f64 = 2e6;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error("experiment needs at least one trial")]
    NoTrials,
    #[error("experiment needs at least one method")]
    NoMethods,
    #[error("snr_db_grid must not be empty")]
    EmptySnrGrid,
    #[error("{0} must not be empty when present")]
    EmptyGrid(&'static str),
    #[error("at most one of snr_db_grid, psi_grid, cluster_grid may hold more than one value")]
    MultipleAxes,
    #[error("cluster_grid requires an sbm graph spec")]
    ClusterGridNeedsSbm,
    #[error("psi_grid requires default (all-ones) coefficients")]
    PsiGridNeedsDefaultCoeffs,
    #[error("a custom shift operator cannot be built from a spec")]
    CustomGso,
    #[error(
        "exhaustive search over {n} nodes at sparsity {s} spans {subsets:.3e} subsets \
         (cap {cap:.1e}); use gm-gic or g-bnb instead"
    )]
    EnumerationTooLarge { n: usize, s: usize, subsets: f64, cap: f64 },
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(String),
    #[error("json: {0}")]
    Json(String),
    #[error("thread pool: {0}")]
    Pool(String),
}

/// Graph family to draw instances on.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GraphSpec {
    /// Equal-size clusters with Bernoulli intra-cluster edges and
    /// deterministic inter-cluster links between lowest-index nodes.
    Sbm { clusters: usize, per_cluster: usize, p_within: f64, link_nodes: usize },
    Cycle { n: usize },
    Path { n: usize },
    Grid2d { rows: usize, cols: usize },
    ErdosRenyi { n: usize, p: f64 },
    EdgeList { path: String },
}

fn default_gso() -> GsoKind {
    GsoKind::LaplacianUnweighted
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FilterSpec {
    pub psi: usize,
    /// Polynomial coefficients, lowest order first; all ones when absent.
    #[serde(default)]
    pub coeffs: Option<Vec<f64>>,
    #[serde(default = "default_gso")]
    pub gso: GsoKind,
    /// Rescale the operator so its largest eigenvalue hits this value.
    #[serde(default)]
    pub eig_normalize_to: Option<f64>,
    /// Sweep axis over the filter order; overrides `psi` when present.
    #[serde(default)]
    pub psi_grid: Option<Vec<usize>>,
}

fn default_value_dist() -> ValueDist {
    ValueDist::StdNormal
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SignalSpec {
    pub scenario: Scenario,
    pub sparsity: usize,
    #[serde(default = "default_value_dist")]
    pub value_dist: ValueDist,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct NoiseSpec {
    pub sigma_n: f64,
    /// Sweep axis over SNR in dB; a single value means no sweep.
    pub snr_db_grid: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum MethodName {
    Exhaustive,
    GmGic,
    GBnb,
    Omp,
    Lasso,
}

impl MethodName {
    pub fn label(self) -> &'static str {
        match self {
            MethodName::Exhaustive => "exhaustive",
            MethodName::GmGic => "gm-gic",
            MethodName::GBnb => "g-bnb",
            MethodName::Omp => "omp",
            MethodName::Lasso => "lasso",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MethodSpec {
    pub method: MethodName,
    /// Append a first-order-correction pass and report it as `<method>+gfoc`.
    #[serde(default)]
    pub gfoc: bool,
    /// Swap-candidate hop radius for the correction pass (default 1).
    #[serde(default)]
    pub gfoc_radius: Option<usize>,
    /// Lasso regularization weight override.
    #[serde(default)]
    pub lambda: Option<f64>,
    /// Screening threshold override (defaults to sigma_n).
    #[serde(default)]
    pub zeta: Option<f64>,
}

/// Declarative description of one Monte-Carlo experiment.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExperimentSpec {
    pub graph: GraphSpec,
    pub filter: FilterSpec,
    pub signal: SignalSpec,
    pub noise: NoiseSpec,
    pub methods: Vec<MethodSpec>,
    pub trials: usize,
    pub seed: u64,
    /// Redraw random graphs every trial instead of fixing one per grid point.
    #[serde(default)]
    pub regenerate_graph_per_trial: bool,
    /// Sweep axis over the number of sbm clusters (reported as node count).
    #[serde(default)]
    pub cluster_grid: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Axis {
    SnrDb,
    Psi,
    NodeCount,
}

impl Axis {
    fn name(self) -> &'static str {
        match self {
            Axis::SnrDb => "snr_db",
            Axis::Psi => "psi",
            Axis::NodeCount => "n",
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct GridPoint {
    snr_db: f64,
    psi: usize,
    clusters: Option<usize>,
}

/// One aggregated output row: a method at a sweep-axis value.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ReportRow {
    pub method: String,
    pub axis: String,
    pub axis_value: f64,
    pub fscore_mean: f64,
    pub fscore_se: f64,
    pub mse_mean: f64,
    pub mse_se: f64,
    pub evals_mean: f64,
    pub trials: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Report {
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn to_csv_string(&self) -> Result<String, BenchError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row).map_err(|e| BenchError::Csv(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| BenchError::Csv(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| BenchError::Csv(e.to_string()))
    }

    pub fn to_json_string(&self) -> Result<String, BenchError> {
        serde_json::to_string_pretty(self).map_err(|e| BenchError::Json(e.to_string()))
    }
}

/// Dice-style F-score between true and estimated supports; two empty sets
/// count as a perfect match.
pub fn f_score(truth: &SupportSet, estimate: &SupportSet) -> f64 {
    if truth.is_empty() && estimate.is_empty() {
        return 1.0;
    }
    let tp = truth.intersection_size(estimate) as f64;
    let fp = estimate.len() as f64 - tp;
    let fl = truth.len() as f64 - tp;
    let denom = 2.0 * tp + fp + fl;
    if denom == 0.0 {
        1.0
    } else {
        2.0 * tp / denom
    }
}

/// Squared distance between unit-normalized signals; a zero estimate scores 1.
pub fn mse_normalized(x: &Array1<f64>, support: &SupportSet, x_hat: &[f64]) -> f64 {
    let xn = x.dot(x).sqrt();
    debug_assert!(xn > 0.0, "true signal must be nonzero");
    let mut dense = vec![0.0; x.len()];
    for (slot, &node) in support.nodes().iter().enumerate() {
        dense[node] = x_hat[slot];
    }
    let hn = dense.iter().map(|v| v * v).sum::<f64>().sqrt();
    if hn == 0.0 {
        return 1.0;
    }
    x.iter().zip(&dense).map(|(a, b)| (a / xn - b / hn).powi(2)).sum()
}

/// Number of nonempty candidate subsets of size at most `s` from `n` nodes,
/// in floating point to avoid overflow.
pub fn subset_count(n: usize, s: usize) -> f64 {
    let mut total = 0.0;
    let mut c = 1.0;
    for j in 1..=s.min(n) {
        c = c * (n - j + 1) as f64 / j as f64;
        total += c;
        if !total.is_finite() {
            return f64::INFINITY;
        }
    }
    total
}

const GRAPH_SEED_XOR: u64 = 0x9E37_79B9_7F4A_7C15;

impl ExperimentSpec {
    /// Parses a spec from JSON text.
    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        serde_json::from_str(text).map_err(|e| BenchError::Json(e.to_string()))
    }

    pub fn to_json_string(&self) -> Result<String, BenchError> {
        serde_json::to_string_pretty(self).map_err(|e| BenchError::Json(e.to_string()))
    }

    fn axis(&self) -> Result<Axis, BenchError> {
        if self.noise.snr_db_grid.is_empty() {
            return Err(BenchError::EmptySnrGrid);
        }
        if matches!(&self.filter.psi_grid, Some(g) if g.is_empty()) {
            return Err(BenchError::EmptyGrid("psi_grid"));
        }
        if matches!(&self.cluster_grid, Some(g) if g.is_empty()) {
            return Err(BenchError::EmptyGrid("cluster_grid"));
        }
        let lens = [
            self.noise.snr_db_grid.len(),
            self.filter.psi_grid.as_ref().map_or(1, Vec::len),
            self.cluster_grid.as_ref().map_or(1, Vec::len),
        ];
        if lens.iter().filter(|&&l| l > 1).count() > 1 {
            return Err(BenchError::MultipleAxes);
        }
        if self.cluster_grid.is_some() && !matches!(self.graph, GraphSpec::Sbm { .. }) {
            return Err(BenchError::ClusterGridNeedsSbm);
        }
        if matches!(&self.filter.psi_grid, Some(g) if g.len() > 1) && self.filter.coeffs.is_some() {
            return Err(BenchError::PsiGridNeedsDefaultCoeffs);
        }
        Ok(if lens[2] > 1 {
            Axis::NodeCount
        } else if lens[1] > 1 {
            Axis::Psi
        } else {
            Axis::SnrDb
        })
    }

    fn validate(&self) -> Result<Axis, BenchError> {
        if self.trials == 0 {
            return Err(BenchError::NoTrials);
        }
        if self.methods.is_empty() {
            return Err(BenchError::NoMethods);
        }
        if self.filter.gso == GsoKind::Custom {
            return Err(BenchError::CustomGso);
        }
        self.axis()
    }

    fn grid_points(&self, axis: Axis) -> Vec<GridPoint> {
        let snr0 = self.noise.snr_db_grid[0];
        let psi0 = self.filter.psi_grid.as_ref().map_or(self.filter.psi, |g| g[0]);
        let clusters0 = self.cluster_grid.as_ref().map(|g| g[0]);
        match axis {
            Axis::SnrDb => self
                .noise
                .snr_db_grid
                .iter()
                .map(|&snr_db| GridPoint { snr_db, psi: psi0, clusters: clusters0 })
                .collect(),
            Axis::Psi => self
                .filter
                .psi_grid
                .as_ref()
                .unwrap()
                .iter()
                .map(|&psi| GridPoint { snr_db: snr0, psi, clusters: clusters0 })
                .collect(),
            Axis::NodeCount => self
                .cluster_grid
                .as_ref()
                .unwrap()
                .iter()
                .map(|&c| GridPoint { snr_db: snr0, psi: psi0, clusters: Some(c) })
                .collect(),
        }
    }
}

/// Graph, distance table, and filter shared by every method in one trial.
struct TrialEnv {
    graph: Arc<Graph>,
    table: Arc<GeodesicTable>,
    filter: Arc<GraphFilter>,
}

fn build_graph(
    spec: &GraphSpec,
    clusters_override: Option<usize>,
    preloaded: Option<&Graph>,
    rng: &mut ChaCha8Rng,
) -> Result<Graph, BenchError> {
    Ok(match spec {
        GraphSpec::Sbm { clusters, per_cluster, p_within, link_nodes } => {
            let k = clusters_override.unwrap_or(*clusters);
            sbm(k, *per_cluster, *p_within, *link_nodes, rng)?
        }
        GraphSpec::Cycle { n } => cycle(*n)?,
        GraphSpec::Path { n } => path(*n)?,
        GraphSpec::Grid2d { rows, cols } => grid2d(*rows, *cols)?,
        GraphSpec::ErdosRenyi { n, p } => erdos_renyi(*n, *p, rng)?,
        GraphSpec::EdgeList { .. } => {
            preloaded.expect("edge-list graph parsed during validation").clone()
        }
    })
}

fn build_env(
    spec: &ExperimentSpec,
    gp: GridPoint,
    preloaded: Option<&Graph>,
    graph_stream: u64,
) -> Result<TrialEnv, BenchError> {
    let mut grng = ChaCha8Rng::seed_from_u64(spec.seed ^ GRAPH_SEED_XOR);
    grng.set_stream(graph_stream);
    let graph = build_graph(&spec.graph, gp.clusters, preloaded, &mut grng)?;
    let table = graph.geodesic_table();
    let gso = match spec.filter.gso {
        GsoKind::LaplacianUnweighted => laplacian(&graph, false),
        GsoKind::LaplacianWeighted => laplacian(&graph, true),
        GsoKind::Adjacency => adjacency_operator(&graph, true),
        GsoKind::Custom => return Err(BenchError::CustomGso),
    };
    let gso = match spec.filter.eig_normalize_to {
        Some(target) => gso.normalized_to_max_eigenvalue(target)?,
        None => gso,
    };
    let coeffs = match &spec.filter.coeffs {
        Some(c) => c.clone(),
        None => vec![1.0; gp.psi + 1],
    };
    let filter = build_filter(&gso, &coeffs, &table)?;
    Ok(TrialEnv { graph: Arc::new(graph), table: Arc::new(table), filter: Arc::new(filter) })
}

/// Per-trial, per-row sample; `None` marks a failed run.
type RowSamples = Vec<Option<(f64, f64, f64)>>;

fn rows_per_trial(methods: &[MethodSpec]) -> usize {
    methods.iter().map(|m| if m.gfoc { 2 } else { 1 }).sum()
}

fn run_trial(spec: &ExperimentSpec, env: &TrialEnv, gp: GridPoint, stream: u64) -> RowSamples {
    let mut out = Vec::with_capacity(rows_per_trial(&spec.methods));
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(stream);

    let instance = draw_support(&env.graph, spec.signal.scenario, spec.signal.sparsity, &mut rng)
        .map_err(BenchError::Filter)
        .and_then(|support| {
            simulate_instance(
                &env.filter,
                &support,
                spec.signal.value_dist,
                gp.snr_db,
                spec.noise.sigma_n,
                false,
                &mut rng,
            )
            .map_err(BenchError::Filter)
        });
    let instance = match instance {
        Ok(inst) => inst,
        Err(_) => {
            out.resize(rows_per_trial(&spec.methods), None);
            return out;
        }
    };

    for ms in &spec.methods {
        let mut cfg = GicConfig::new(spec.signal.sparsity, spec.noise.sigma_n);
        if let Some(z) = ms.zeta {
            cfg = cfg.with_zeta(z);
        }
        let mut ev = GicEvaluator::for_instance(&instance);
        let base = match ms.method {
            MethodName::Exhaustive => exhaustive_gic(&mut ev, &cfg, None),
            MethodName::GmGic => gm_gic(&mut ev, &cfg, &env.table),
            MethodName::GBnb => graph_bnb_gic(&mut ev, &cfg, None),
            MethodName::Omp => omp(&mut ev, &cfg),
            MethodName::Lasso => {
                let settings = LassoSettings {
                    lambda: ms.lambda.unwrap_or_else(|| LassoSettings::default().lambda),
                    ..LassoSettings::default()
                };
                lasso(&mut ev, &cfg, &settings)
            }
        };
        out.push(base.as_ref().ok().map(|r| sample(&instance, r)));
        if ms.gfoc {
            let corrected = base.as_ref().ok().and_then(|b| {
                gfoc(&mut ev, &cfg, &env.table, &b.support, ms.gfoc_radius.unwrap_or(1)).ok()
            });
            out.push(corrected.as_ref().map(|r| sample(&instance, r)));
        }
    }
    out
}

fn sample(instance: &Instance, r: &RecoveryResult) -> (f64, f64, f64) {
    (
        f_score(&instance.support, &r.support),
        mse_normalized(&instance.x, &r.support, &r.x_hat),
        r.evals as f64,
    )
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    let k = values.len();
    if k == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / k as f64;
    if k == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    (mean, (var / k as f64).sqrt())
}

/// Runs the experiment on `jobs` worker threads (0 picks the default) and
/// aggregates one report row per method per grid point. Individual trial
/// failures are counted, not fatal; wall time goes to stderr.
pub fn run_experiment(spec: &ExperimentSpec, jobs: usize) -> Result<Report, BenchError> {
    let started = Instant::now();
    let axis = spec.validate()?;
    let grid = spec.grid_points(axis);

    let preloaded = match &spec.graph {
        GraphSpec::EdgeList { path } => {
            Some(load_edge_list(&std::fs::read_to_string(path)?)?)
        }
        _ => None,
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| BenchError::Pool(e.to_string()))?;

    let mut row_labels = Vec::new();
    for ms in &spec.methods {
        row_labels.push(ms.method.label().to_string());
        if ms.gfoc {
            row_labels.push(format!("{}+gfoc", ms.method.label()));
        }
    }

    let mut rows = Vec::with_capacity(grid.len() * row_labels.len());
    for (gi, &gp) in grid.iter().enumerate() {
        // The graph stream depends on the grid index only when the axis
        // changes the graph itself, so e.g. an SNR sweep reuses one graph.
        let graph_key = if axis == Axis::NodeCount { gi as u64 } else { 0 };
        let shared_env = if spec.regenerate_graph_per_trial {
            None
        } else {
            Some(build_env(spec, gp, preloaded.as_ref(), graph_key << 32)?)
        };

        let probe_n = match &shared_env {
            Some(env) => env.graph.node_count(),
            None => build_env(spec, gp, preloaded.as_ref(), graph_key << 32)?.graph.node_count(),
        };
        guard_enumeration(spec, probe_n)?;

        let axis_value = match axis {
            Axis::SnrDb => gp.snr_db,
            Axis::Psi => gp.psi as f64,
            Axis::NodeCount => {
                // Report the resulting node count, not the cluster count.
                match (&shared_env, &spec.graph) {
                    (Some(env), _) => env.graph.node_count() as f64,
                    (None, GraphSpec::Sbm { per_cluster, .. }) => {
                        (gp.clusters.unwrap_or(1) * per_cluster) as f64
                    }
                    _ => unreachable!("node-count axis implies an sbm spec"),
                }
            }
        };

        let outcomes: Vec<RowSamples> = pool.install(|| {
            (0..spec.trials)
                .into_par_iter()
                .map(|trial| {
                    let stream = ((gi as u64) << 32) | trial as u64;
                    match &shared_env {
                        Some(env) => run_trial(spec, env, gp, stream),
                        None => {
                            let g_stream = (graph_key << 32) | trial as u64;
                            match build_env(spec, gp, preloaded.as_ref(), g_stream) {
                                Ok(env) => run_trial(spec, &env, gp, stream),
                                Err(_) => vec![None; rows_per_trial(&spec.methods)],
                            }
                        }
                    }
                })
                .collect()
        });

        for (ri, label) in row_labels.iter().enumerate() {
            let samples: Vec<(f64, f64, f64)> =
                outcomes.iter().filter_map(|trial| trial[ri]).collect();
            let fs: Vec<f64> = samples.iter().map(|s| s.0).collect();
            let ms: Vec<f64> = samples.iter().map(|s| s.1).collect();
            let es: Vec<f64> = samples.iter().map(|s| s.2).collect();
            let (fscore_mean, fscore_se) = mean_se(&fs);
            let (mse_mean, mse_se) = mean_se(&ms);
            let (evals_mean, _) = mean_se(&es);
            rows.push(ReportRow {
                method: label.clone(),
                axis: axis.name().to_string(),
                axis_value,
                fscore_mean,
                fscore_se,
                mse_mean,
                mse_se,
                evals_mean,
                trials: spec.trials,
                failures: spec.trials - samples.len(),
            });
        }
    }

    eprintln!(
        "experiment: {} grid point(s) x {} trial(s) x {} row(s) in {:.2}s",
        grid.len(),
        spec.trials,
        row_labels.len(),
        started.elapsed().as_secs_f64()
    );
    Ok(Report { rows })
}

fn guard_enumeration(spec: &ExperimentSpec, n: usize) -> Result<(), BenchError> {
    if spec.methods.iter().any(|m| m.method == MethodName::Exhaustive) {
        let subsets = subset_count(n, spec.signal.sparsity);
        if subsets > ENUMERATION_CAP {
            return Err(BenchError::EnumerationTooLarge {
                n,
                s: spec.signal.sparsity,
                subsets,
                cap: ENUMERATION_CAP,
            });
        }
    }
    Ok(())
}
