//! Mutual-coherence analysis of dictionary columns, specialized to the
//! unweighted Laplacian where closed forms in node degrees are available.
//!
//! For the unweighted Laplacian L, the inner product of columns k and m
//! depends only on degrees and the number of shared neighbors: it is
//! `d(k) + d(k)^2` on the diagonal, `d_in(k,m) - d(k) - d(m)` for adjacent
//! nodes, `d_in(k,m)` at hop distance two, and zero beyond, with `d_in` the
//! size of the open-neighborhood intersection.

use ndarray::ArrayView2;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{laplacian, GeodesicTable, Graph, UNREACHABLE};

#[derive(Debug, Error, PartialEq)]
pub enum CoherenceError {
    #[error("column {0} is zero; coherence is undefined")]
    ZeroColumn(usize),
    #[error("coherence needs at least two columns")]
    TooFewColumns,
    #[error("expected dist(k, m) < dist(j, m), got {near} vs {far}")]
    NotOrderedByDistance { near: u32, far: u32 },
    #[error("node {node} outside 0..{n}")]
    NodeOutOfRange { node: usize, n: usize },
}

/// Number of common neighbors of k and m (open neighborhoods).
pub fn shared_neighbor_count(g: &Graph, k: usize, m: usize) -> usize {
    g.neighbors(k).filter(|&v| v != m && g.neighbors(m).any(|w| w == v)).count()
}

/// Inner product of unweighted-Laplacian columns k and m via the degree
/// formula, cross-checked against the direct matrix dot product.
pub fn laplacian_inner_product(g: &Graph, table: &GeodesicTable, k: usize, m: usize) -> f64 {
    let dk = g.degree(k) as f64;
    let dm = g.degree(m) as f64;
    let value = match table.dist(k, m) {
        0 => dk + dk * dk,
        1 => shared_neighbor_count(g, k, m) as f64 - dk - dm,
        2 => shared_neighbor_count(g, k, m) as f64,
        _ => 0.0,
    };
    let l = laplacian(g, false);
    let direct = l.matrix().column(k).dot(&l.matrix().column(m));
    assert!(
        (value - direct).abs() <= 1e-12,
        "degree formula disagrees with direct product: {value} vs {direct}"
    );
    value
}

/// Mutual coherence of a column dictionary with optional degree-based bounds
/// (present only for unweighted Laplacians of graphs with no isolated node).
#[derive(Debug, Clone, Serialize)]
pub struct CoherenceReport {
    pub mu: f64,
    /// Column pair (k, m), k < m, attaining the maximum.
    pub argmax_pair: (usize, usize),
    pub lower_bound: Option<f64>,
    pub upper_bound: Option<f64>,
    pub d_min: Option<usize>,
    pub d_max: Option<usize>,
}

/// Largest absolute normalized inner product over distinct column pairs.
/// Pairs are scanned in lexicographic order and ties keep the first pair.
pub fn mutual_coherence(matrix: ArrayView2<f64>) -> Result<CoherenceReport, CoherenceError> {
    let n = matrix.ncols();
    if n < 2 {
        return Err(CoherenceError::TooFewColumns);
    }
    let norms: Vec<f64> = (0..n).map(|c| matrix.column(c).dot(&matrix.column(c)).sqrt()).collect();
    if let Some(c) = norms.iter().position(|&v| v == 0.0) {
        return Err(CoherenceError::ZeroColumn(c));
    }
    let mut mu = -1.0;
    let mut argmax_pair = (0, 1);
    for k in 0..n {
        for m in (k + 1)..n {
            let v = matrix.column(k).dot(&matrix.column(m)).abs() / (norms[k] * norms[m]);
            if v > mu {
                mu = v;
                argmax_pair = (k, m);
            }
        }
    }
    Ok(CoherenceReport { mu, argmax_pair, lower_bound: None, upper_bound: None, d_min: None, d_max: None })
}

/// Mutual coherence of the unweighted Laplacian with the degree bounds
/// `d_min / (d_max + d_max^2) <= mu <= 2 d_max / (d_min + d_min^2)`.
pub fn laplacian_coherence(g: &Graph) -> Result<CoherenceReport, CoherenceError> {
    let l = laplacian(g, false);
    let mut report = mutual_coherence(l.matrix().view())?;
    let d_min = g.min_degree() as f64;
    let d_max = g.max_degree() as f64;
    report.lower_bound = Some(d_min / (d_max + d_max * d_max));
    report.upper_bound = Some(2.0 * d_max / (d_min + d_min * d_min));
    report.d_min = Some(g.min_degree());
    report.d_max = Some(g.max_degree());
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityCheck {
    pub energy_near: f64,
    pub energy_far: f64,
    pub pass: bool,
}

/// Checks that the squared projection of Laplacian column `k` onto column
/// `m`'s span dominates that of a farther column `j` (hop distance from `m`
/// strictly larger). Tolerance 1e-12.
pub fn projection_monotonicity_check(
    g: &Graph,
    table: &GeodesicTable,
    m: usize,
    k: usize,
    j: usize,
) -> Result<MonotonicityCheck, CoherenceError> {
    let n = g.node_count();
    for node in [m, k, j] {
        if node >= n {
            return Err(CoherenceError::NodeOutOfRange { node, n });
        }
    }
    let (near, far) = (table.dist(k, m), table.dist(j, m));
    if !(near < far) {
        return Err(CoherenceError::NotOrderedByDistance { near, far });
    }
    let l = laplacian(g, false);
    let lm = l.matrix().column(m);
    let base = lm.dot(&lm);
    if base == 0.0 {
        return Err(CoherenceError::ZeroColumn(m));
    }
    let energy = |c: usize| {
        let d = lm.dot(&l.matrix().column(c));
        d * d / base
    };
    let (energy_near, energy_far) = (energy(k), energy(j));
    Ok(MonotonicityCheck { energy_near, energy_far, pass: energy_near >= energy_far - 1e-12 })
}

/// Convenience: true when `dist(j, m)` is finite; an unreachable far node is
/// allowed (its projection is zero) as long as `k` is strictly nearer.
pub fn distance_comparable(table: &GeodesicTable, m: usize, k: usize, j: usize) -> bool {
    table.dist(k, m) < table.dist(j, m) && table.dist(k, m) != UNREACHABLE
}
