//! Undirected weighted graphs, hop-distance tables, graph-shift operators,
//! and the standard generators used by the benchmark harness.
//!
//! Distances are always hop counts (edge weights affect operator entries,
//! never path lengths). Disconnected pairs carry the `UNREACHABLE` sentinel,
//! which compares greater than any radius used in this crate.

use std::collections::VecDeque;
use std::sync::Arc;

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg;
use crate::support::SupportSet;

/// Hop distance assigned to unreachable pairs.
pub const UNREACHABLE: u32 = u32::MAX;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    Empty,
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("edge ({u}, {v}) references a node outside 0..{n}")]
    EndpointOutOfRange { u: usize, v: usize, n: usize },
    #[error("edge ({u}, {v}) has non-positive weight {w}")]
    NonPositiveWeight { u: usize, v: usize, w: f64 },
    #[error("edge list parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{kind} generator: {msg}")]
    Generator { kind: String, msg: String },
    #[error("graph shift operator must be square and symmetric")]
    NotSymmetric,
    #[error("operator entry ({k}, {m}) = {value} violates the one-hop zero pattern")]
    ZeroPatternViolation { k: usize, m: usize, value: f64 },
    #[error("largest eigenvalue {found} is not positive; cannot normalize to {target}")]
    NonPositiveSpectrum { found: f64, target: f64 },
    #[error("normalization target {0} must be positive")]
    BadTarget(f64),
}

/// Simple undirected weighted graph. Edges are stored canonically:
/// endpoints ordered `u < v`, list sorted by `(u, v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut canon: Vec<(usize, usize, f64)> = Vec::new();
        for (a, b, w) in edges {
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            if a >= n || b >= n {
                return Err(GraphError::EndpointOutOfRange { u: a, v: b, n });
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(GraphError::NonPositiveWeight { u: a, v: b, w });
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            canon.push((u, v, w));
        }
        canon.sort_by_key(|&(u, v, _)| (u, v));
        for pair in canon.windows(2) {
            if pair[0].0 == pair[1].0 && pair[0].1 == pair[1].1 {
                return Err(GraphError::DuplicateEdge(pair[0].0, pair[0].1));
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v, w) in &canon {
            adjacency[u].push((v, w));
            adjacency[v].push((u, w));
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(v, _)| v);
        }
        Ok(Graph { n, edges: canon, adjacency })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[u].iter().map(|&(v, _)| v)
    }

    pub fn weighted_neighbors(&self, u: usize) -> &[(usize, f64)] {
        &self.adjacency[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adjacency[u].len()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|u| self.degree(u)).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        (0..self.n).map(|u| self.degree(u)).min().unwrap_or(0)
    }

    /// All-pairs hop distances by breadth-first search from every node.
    pub fn geodesic_table(&self) -> GeodesicTable {
        let n = self.n;
        let mut dist = vec![UNREACHABLE; n * n];
        let mut queue = VecDeque::new();
        for src in 0..n {
            let row = &mut dist[src * n..(src + 1) * n];
            row[src] = 0;
            queue.clear();
            queue.push_back(src);
            while let Some(u) = queue.pop_front() {
                let du = row[u];
                for &(v, _) in &self.adjacency[u] {
                    if row[v] == UNREACHABLE {
                        row[v] = du + 1;
                        queue.push_back(v);
                    }
                }
            }
        }
        GeodesicTable { n, dist }
    }
}

/// All-pairs hop-distance lookup.
#[derive(Debug, Clone)]
pub struct GeodesicTable {
    n: usize,
    dist: Vec<u32>,
}

impl GeodesicTable {
    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn dist(&self, k: usize, m: usize) -> u32 {
        self.dist[k * self.n + m]
    }

    pub fn reachable(&self, k: usize, m: usize) -> bool {
        self.dist(k, m) != UNREACHABLE
    }
}

/// Closed neighborhood of radius `radius` around `seeds`: every node within
/// `radius` hops of some seed, seeds included.
pub fn neighborhood(table: &GeodesicTable, seeds: &SupportSet, radius: u32) -> SupportSet {
    let mut out = Vec::new();
    for m in 0..table.node_count() {
        if seeds.iter().any(|k| table.dist(k, m) <= radius) {
            out.push(m);
        }
    }
    SupportSet::from_sorted(out)
}

/// Worst-case cardinality of a radius-`2 psi` closed neighborhood around a
/// support of size `s` in a graph with maximum degree `d_max`:
/// `s * sum_{j=0}^{2 psi} d_max^j`, saturating on overflow.
pub fn neighborhood_cardinality_bound(s: usize, d_max: usize, psi: usize) -> u64 {
    let mut sum: u64 = 0;
    let mut term: u64 = 1;
    for j in 0..=(2 * psi) {
        sum = sum.saturating_add(term);
        if j < 2 * psi {
            term = term.saturating_mul(d_max as u64);
        }
    }
    sum.saturating_mul(s as u64)
}

/// Which operator a `GsoMatrix` holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GsoKind {
    LaplacianUnweighted,
    LaplacianWeighted,
    Adjacency,
    Custom,
}

/// A graph shift operator: symmetric, with `S[k][m] = 0` whenever nodes
/// `k` and `m` are distinct non-neighbors.
#[derive(Debug, Clone)]
pub struct GsoMatrix {
    matrix: Array2<f64>,
    kind: GsoKind,
}

impl GsoMatrix {
    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn kind(&self) -> GsoKind {
        self.kind
    }

    pub fn node_count(&self) -> usize {
        self.matrix.nrows()
    }

    /// Wraps an arbitrary symmetric matrix, validating the one-hop zero
    /// pattern against the given distance table.
    pub fn custom(matrix: Array2<f64>, table: &GeodesicTable) -> Result<Self, GraphError> {
        let n = matrix.nrows();
        if matrix.ncols() != n || n != table.node_count() {
            return Err(GraphError::NotSymmetric);
        }
        for k in 0..n {
            for m in 0..n {
                if (matrix[[k, m]] - matrix[[m, k]]).abs() > 1e-12 {
                    return Err(GraphError::NotSymmetric);
                }
                if table.dist(k, m) > 1 && matrix[[k, m]] != 0.0 {
                    return Err(GraphError::ZeroPatternViolation { k, m, value: matrix[[k, m]] });
                }
            }
        }
        Ok(GsoMatrix { matrix, kind: GsoKind::Custom })
    }

    /// Rescales so the largest eigenvalue equals `target`. The eigenvalue is
    /// found by shifted power iteration (relative tolerance 1e-10, at most
    /// 10_000 iterations). A zero matrix is returned unchanged.
    pub fn normalized_to_max_eigenvalue(&self, target: f64) -> Result<Self, GraphError> {
        if !(target > 0.0) {
            return Err(GraphError::BadTarget(target));
        }
        if self.matrix.iter().all(|&v| v == 0.0) {
            return Ok(self.clone());
        }
        let lambda = linalg::max_eigenvalue_symmetric(self.matrix.view(), 1e-10, 10_000);
        if lambda <= 0.0 {
            return Err(GraphError::NonPositiveSpectrum { found: lambda, target });
        }
        Ok(GsoMatrix { matrix: &self.matrix * (target / lambda), kind: self.kind })
    }
}

/// Graph Laplacian L = D - W. With `weighted = false` every edge counts 1
/// regardless of its stored weight.
pub fn laplacian(g: &Graph, weighted: bool) -> GsoMatrix {
    let n = g.node_count();
    let mut m = Array2::<f64>::zeros((n, n));
    for &(u, v, w) in g.edges() {
        let w = if weighted { w } else { 1.0 };
        m[[u, v]] = -w;
        m[[v, u]] = -w;
        m[[u, u]] += w;
        m[[v, v]] += w;
    }
    let kind = if weighted { GsoKind::LaplacianWeighted } else { GsoKind::LaplacianUnweighted };
    GsoMatrix { matrix: m, kind }
}

/// Adjacency operator W (or the 0/1 pattern when `weighted = false`).
pub fn adjacency_operator(g: &Graph, weighted: bool) -> GsoMatrix {
    let n = g.node_count();
    let mut m = Array2::<f64>::zeros((n, n));
    for &(u, v, w) in g.edges() {
        let w = if weighted { w } else { 1.0 };
        m[[u, v]] = w;
        m[[v, u]] = w;
    }
    GsoMatrix { matrix: m, kind: GsoKind::Adjacency }
}

pub fn cycle(n: usize) -> Result<Graph, GraphError> {
    if n < 3 {
        return Err(GraphError::Generator { kind: "cycle".into(), msg: format!("needs n >= 3, got {n}") });
    }
    Graph::new(n, (0..n).map(|i| (i, (i + 1) % n, 1.0)))
}

pub fn path(n: usize) -> Result<Graph, GraphError> {
    if n < 1 {
        return Err(GraphError::Generator { kind: "path".into(), msg: "needs n >= 1".into() });
    }
    Graph::new(n, (0..n.saturating_sub(1)).map(|i| (i, i + 1, 1.0)))
}

pub fn grid2d(rows: usize, cols: usize) -> Result<Graph, GraphError> {
    if rows == 0 || cols == 0 {
        return Err(GraphError::Generator { kind: "grid2d".into(), msg: "needs rows, cols >= 1".into() });
    }
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let id = r * cols + c;
            if c + 1 < cols {
                edges.push((id, id + 1, 1.0));
            }
            if r + 1 < rows {
                edges.push((id, id + cols, 1.0));
            }
        }
    }
    Graph::new(rows * cols, edges)
}

/// Erdos-Renyi G(n, p): each unordered pair drawn independently, pairs
/// visited in lexicographic order so a fixed RNG stream fixes the graph.
pub fn erdos_renyi<R: Rng>(n: usize, p: f64, rng: &mut R) -> Result<Graph, GraphError> {
    if n == 0 {
        return Err(GraphError::Generator { kind: "erdos-renyi".into(), msg: "needs n >= 1".into() });
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(GraphError::Generator { kind: "erdos-renyi".into(), msg: format!("p = {p} outside [0, 1]") });
    }
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen::<f64>() < p {
                edges.push((u, v, 1.0));
            }
        }
    }
    Graph::new(n, edges)
}

/// Stochastic block model with equally sized clusters. Within-cluster pairs
/// are drawn independently with probability `p_intra`; consecutive clusters
/// are joined deterministically by `link_nodes` bridge edges, pairing the
/// j-th lowest-indexed node of each cluster.
pub fn sbm<R: Rng>(
    clusters: usize,
    per_cluster: usize,
    p_intra: f64,
    link_nodes: usize,
    rng: &mut R,
) -> Result<Graph, GraphError> {
    let gen_err = |msg: String| GraphError::Generator { kind: "sbm".into(), msg };
    if clusters == 0 || per_cluster == 0 {
        return Err(gen_err("needs clusters, per_cluster >= 1".into()));
    }
    if !(0.0..=1.0).contains(&p_intra) {
        return Err(gen_err(format!("p_intra = {p_intra} outside [0, 1]")));
    }
    if link_nodes > per_cluster {
        return Err(gen_err(format!("link_nodes = {link_nodes} exceeds cluster size {per_cluster}")));
    }
    let mut edges = Vec::new();
    for c in 0..clusters {
        let base = c * per_cluster;
        for i in 0..per_cluster {
            for j in (i + 1)..per_cluster {
                if rng.gen::<f64>() < p_intra {
                    edges.push((base + i, base + j, 1.0));
                }
            }
        }
    }
    for c in 0..clusters.saturating_sub(1) {
        for j in 0..link_nodes {
            edges.push((c * per_cluster + j, (c + 1) * per_cluster + j, 1.0));
        }
    }
    Graph::new(clusters * per_cluster, edges)
}

/// Parses the plain-text edge-list format: first data line is the node
/// count, each following line is `u v w` (0-based endpoints). Blank lines
/// and lines starting with `#` are ignored.
pub fn load_edge_list(text: &str) -> Result<Graph, GraphError> {
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = idx + 1;
        if n.is_none() {
            n = Some(line.parse().map_err(|_| GraphError::Parse {
                line: lineno,
                msg: format!("expected node count, got {line:?}"),
            })?);
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(GraphError::Parse {
                line: lineno,
                msg: format!("expected 'u v w', got {line:?}"),
            });
        }
        let parse_usize = |s: &str| {
            s.parse::<usize>().map_err(|_| GraphError::Parse {
                line: lineno,
                msg: format!("bad node index {s:?}"),
            })
        };
        let u = parse_usize(fields[0])?;
        let v = parse_usize(fields[1])?;
        let w = fields[2].parse::<f64>().map_err(|_| GraphError::Parse {
            line: lineno,
            msg: format!("bad weight {:?}", fields[2]),
        })?;
        edges.push((u, v, w));
    }
    match n {
        Some(n) => Graph::new(n, edges),
        None => Err(GraphError::Parse { line: 0, msg: "empty edge list".into() }),
    }
}

/// Canonical edge-list text: node count, then edges sorted by `(u, v)` with
/// shortest-roundtrip weights that always carry a decimal point. Loading and
/// re-saving canonical text is byte-identical.
pub fn save_edge_list(g: &Graph) -> String {
    let mut out = format!("{}\n", g.node_count());
    for &(u, v, w) in g.edges() {
        out.push_str(&format!("{} {} {:?}\n", u, v, w));
    }
    out
}

/// Shared handle bundling a graph with its distance table, used wherever
/// both the topology and hop distances are needed.
#[derive(Debug, Clone)]
pub struct GraphGeometry {
    pub graph: Arc<Graph>,
    pub table: Arc<GeodesicTable>,
}

impl GraphGeometry {
    pub fn new(graph: Graph) -> Self {
        let table = graph.geodesic_table();
        GraphGeometry { graph: Arc::new(graph), table: Arc::new(table) }
    }
}
