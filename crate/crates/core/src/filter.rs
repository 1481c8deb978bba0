//! Polynomial graph filters and synthetic measurement instances.
//!
//! A filter of order `psi` is `H = sum_{i=0}^{psi} h_i S^i` for a graph
//! shift operator S. Because S has the one-hop zero pattern, `H[k][m] = 0`
//! whenever the hop distance between k and m exceeds `psi`, and columns of H
//! are exactly orthogonal for nodes more than `2 psi` hops apart.

use std::sync::Arc;

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GeodesicTable, Graph, GsoKind, GsoMatrix};
use crate::support::SupportSet;

#[derive(Debug, Error, PartialEq)]
pub enum FilterError {
    #[error("filter needs at least two coefficients (order >= 1), got {0}")]
    TooFewCoefficients(usize),
    #[error("filter order {psi} must be below the node count {n}")]
    OrderTooLarge { psi: usize, n: usize },
    #[error("operator/distance-table size mismatch: {a} vs {b}")]
    SizeMismatch { a: usize, b: usize },
    #[error("filter entry ({k}, {m}) = {value} violates the order-{psi} zero pattern")]
    ZeroPatternViolation { k: usize, m: usize, value: f64, psi: usize },
    #[error("sparsity {s} outside 1..={n}")]
    BadSparsity { s: usize, n: usize },
    #[error("mixed supports need sparsity >= 2, got {0}")]
    MixedNeedsTwo(usize),
    #[error("no admissible support of size {s} found for the {scenario} scenario")]
    SupportDrawFailed { scenario: String, s: usize },
    #[error("noise level sigma_n = {0} must be positive")]
    BadSigma(f64),
    #[error("filtered signal is identically zero; SNR calibration impossible")]
    ZeroSignal,
    #[error("support node {node} outside 0..{n}")]
    NodeOutOfRange { node: usize, n: usize },
}

/// A built polynomial graph filter with its defining data.
#[derive(Debug, Clone)]
pub struct GraphFilter {
    h: Array2<f64>,
    psi: usize,
    coeffs: Vec<f64>,
    gso_kind: GsoKind,
}

impl GraphFilter {
    pub fn matrix(&self) -> &Array2<f64> {
        &self.h
    }

    pub fn psi(&self) -> usize {
        self.psi
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn gso_kind(&self) -> GsoKind {
        self.gso_kind
    }

    pub fn node_count(&self) -> usize {
        self.h.nrows()
    }

    /// Inner product of filter columns k and m; exactly zero (up to rounding)
    /// when the nodes are more than `2 psi` hops apart.
    pub fn column_inner_product(&self, k: usize, m: usize) -> f64 {
        self.h.column(k).dot(&self.h.column(m))
    }
}

/// Evaluates `H = sum h_i S^i` by Horner's rule and verifies the order-psi
/// zero pattern against the distance table (tolerance 1e-10).
pub fn build_filter(
    gso: &GsoMatrix,
    coeffs: &[f64],
    table: &GeodesicTable,
) -> Result<GraphFilter, FilterError> {
    let n = gso.node_count();
    if coeffs.len() < 2 {
        return Err(FilterError::TooFewCoefficients(coeffs.len()));
    }
    let psi = coeffs.len() - 1;
    if psi >= n {
        return Err(FilterError::OrderTooLarge { psi, n });
    }
    if table.node_count() != n {
        return Err(FilterError::SizeMismatch { a: n, b: table.node_count() });
    }

    let s = gso.matrix();
    let mut h = Array2::<f64>::eye(n) * coeffs[psi];
    for i in (0..psi).rev() {
        h = h.dot(s);
        for d in 0..n {
            h[[d, d]] += coeffs[i];
        }
    }

    for k in 0..n {
        for m in 0..n {
            if table.dist(k, m) > psi as u32 && h[[k, m]].abs() > 1e-10 {
                return Err(FilterError::ZeroPatternViolation { k, m, value: h[[k, m]], psi });
            }
        }
    }
    Ok(GraphFilter { h, psi, coeffs: coeffs.to_vec(), gso_kind: gso.kind() })
}

/// How nonzero signal values are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValueDist {
    /// Independent standard normal values.
    StdNormal,
    /// Uniform on [-1, -0.5] u [0.5, 1]: bounded away from zero.
    UniformSplit,
}

/// Support placement scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// One seed node plus `s - 1` of its distinct neighbors.
    Localized,
    /// Two seed groups of sizes ceil(s/2) and floor(s/2), each a seed node
    /// plus distinct neighbors; redrawn until the union has exactly s nodes.
    Mixed,
}

/// One synthetic measurement: sparse signal, noise level, and observation.
#[derive(Debug, Clone)]
pub struct Instance {
    pub filter: Arc<GraphFilter>,
    pub x: Array1<f64>,
    pub support: SupportSet,
    pub sigma_n: f64,
    pub snr_db: f64,
    pub y: Array1<f64>,
}

pub fn snr_db_to_linear(snr_db: f64) -> f64 {
    10f64.powf(snr_db / 10.0)
}

/// Draws a support set of size `s` according to the scenario.
pub fn draw_support<R: Rng>(
    g: &Graph,
    scenario: Scenario,
    s: usize,
    rng: &mut R,
) -> Result<SupportSet, FilterError> {
    let n = g.node_count();
    if s == 0 || s > n {
        return Err(FilterError::BadSparsity { s, n });
    }
    match scenario {
        Scenario::Localized => {
            let candidates: Vec<usize> = (0..n).filter(|&u| g.degree(u) >= s - 1).collect();
            if candidates.is_empty() {
                return Err(FilterError::SupportDrawFailed { scenario: "localized".into(), s });
            }
            let seed = candidates[rng.gen_range(0..candidates.len())];
            let mut nodes = vec![seed];
            nodes.extend(sample_distinct(&g.neighbors(seed).collect::<Vec<_>>(), s - 1, rng));
            Ok(SupportSet::new(nodes))
        }
        Scenario::Mixed => {
            if s < 2 {
                return Err(FilterError::MixedNeedsTwo(s));
            }
            let sizes = [s.div_ceil(2), s / 2];
            for _ in 0..1000 {
                let mut nodes = Vec::with_capacity(s);
                for &sz in &sizes {
                    if sz == 0 {
                        continue;
                    }
                    let candidates: Vec<usize> =
                        (0..n).filter(|&u| g.degree(u) >= sz - 1).collect();
                    if candidates.is_empty() {
                        return Err(FilterError::SupportDrawFailed { scenario: "mixed".into(), s });
                    }
                    let seed = candidates[rng.gen_range(0..candidates.len())];
                    nodes.push(seed);
                    nodes.extend(sample_distinct(&g.neighbors(seed).collect::<Vec<_>>(), sz - 1, rng));
                }
                let set = SupportSet::new(nodes);
                if set.len() == s {
                    return Ok(set);
                }
            }
            Err(FilterError::SupportDrawFailed { scenario: "mixed".into(), s })
        }
    }
}

fn sample_distinct<R: Rng>(pool: &[usize], count: usize, rng: &mut R) -> Vec<usize> {
    debug_assert!(count <= pool.len());
    let idx = rand::seq::index::sample(rng, pool.len(), count);
    idx.iter().map(|i| pool[i]).collect()
}

/// Generates `y = H x + w`. The signal values on `support` are drawn from
/// `value_dist` and rescaled so that `||H x||^2 = 10^(snr_db/10) * n * sigma_n^2`
/// exactly; `w` is white Gaussian noise of variance `sigma_n^2`, omitted when
/// `noiseless` is set.
pub fn simulate_instance<R: Rng>(
    filter: &Arc<GraphFilter>,
    support: &SupportSet,
    value_dist: ValueDist,
    snr_db: f64,
    sigma_n: f64,
    noiseless: bool,
    rng: &mut R,
) -> Result<Instance, FilterError> {
    let n = filter.node_count();
    if !(sigma_n > 0.0) {
        return Err(FilterError::BadSigma(sigma_n));
    }
    if support.is_empty() || support.len() > n {
        return Err(FilterError::BadSparsity { s: support.len(), n });
    }
    if let Some(node) = support.iter().find(|&k| k >= n) {
        return Err(FilterError::NodeOutOfRange { node, n });
    }

    let mut x = Array1::<f64>::zeros(n);
    for k in support.iter() {
        x[k] = match value_dist {
            ValueDist::StdNormal => StandardNormal.sample(rng),
            ValueDist::UniformSplit => {
                let mag = rng.gen_range(0.5..=1.0);
                if rng.gen::<bool>() {
                    mag
                } else {
                    -mag
                }
            }
        };
    }

    let hx = filter.matrix().dot(&x);
    let energy: f64 = hx.iter().map(|v| v * v).sum();
    if energy == 0.0 {
        return Err(FilterError::ZeroSignal);
    }
    let target = snr_db_to_linear(snr_db) * n as f64 * sigma_n * sigma_n;
    let scale = (target / energy).sqrt();
    let x = x * scale;
    // Recompute instead of scaling hx so that y == H x holds bit-exactly.
    let hx = filter.matrix().dot(&x);

    let y = if noiseless {
        hx
    } else {
        let noise: Array1<f64> =
            Array1::from_iter((0..n).map(|_| sigma_n * rng.sample::<f64, _>(StandardNormal)));
        hx + noise
    };

    Ok(Instance { filter: Arc::clone(filter), x, support: support.clone(), sigma_n, snr_db, y })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cycle, laplacian, path};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c6_identity_plus_laplacian() -> (Graph, GraphFilter) {
        let g = cycle(6).unwrap();
        let t = g.geodesic_table();
        let l = laplacian(&g, false);
        let f = build_filter(&l, &[1.0, 1.0], &t).unwrap();
        (g, f)
    }

    #[test]
    fn cycle_filter_entries() {
        let (_, f) = c6_identity_plus_laplacian();
        let h = f.matrix();
        assert_eq!(h[[0, 0]], 3.0);
        assert_eq!(h[[0, 1]], -1.0);
        assert_eq!(h[[0, 2]], 0.0);
        assert_eq!(f.psi(), 1);
    }

    #[test]
    fn constant_filter_is_scaled_identity() {
        let g = path(3).unwrap();
        let t = g.geodesic_table();
        let l = laplacian(&g, false);
        let f = build_filter(&l, &[2.5, 0.0], &t).unwrap();
        assert_eq!(f.matrix(), &(Array2::<f64>::eye(3) * 2.5));
    }

    #[test]
    fn build_rejects_bad_orders() {
        let g = path(3).unwrap();
        let t = g.geodesic_table();
        let l = laplacian(&g, false);
        assert_eq!(build_filter(&l, &[1.0], &t).unwrap_err(), FilterError::TooFewCoefficients(1));
        assert_eq!(
            build_filter(&l, &[1.0, 1.0, 1.0, 1.0], &t).unwrap_err(),
            FilterError::OrderTooLarge { psi: 3, n: 3 }
        );
    }

    #[test]
    fn column_orthogonality_by_distance() {
        let (_, f) = c6_identity_plus_laplacian();
        // dist(0,3) = 3 > 2 psi = 2: exactly orthogonal.
        assert_eq!(f.column_inner_product(0, 3), 0.0);
        // dist(0,2) = 2 = 2 psi: overlap of 1.
        assert_relative_eq!(f.column_inner_product(0, 2), 1.0, max_relative = 1e-12);
        assert_relative_eq!(f.column_inner_product(0, 0), 11.0, max_relative = 1e-12);
        assert_relative_eq!(f.column_inner_product(0, 1), -6.0, max_relative = 1e-12);
    }

    #[test]
    fn snr_calibration_is_exact() {
        let g = crate::graph::sbm(2, 70, 6.0 / 70.0, 2, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let t = g.geodesic_table();
        let l = laplacian(&g, false).normalized_to_max_eigenvalue(12.0).unwrap();
        let f = Arc::new(build_filter(&l, &[1.0; 5], &t).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let support = draw_support(&g, Scenario::Localized, 4, &mut rng).unwrap();
        let inst =
            simulate_instance(&f, &support, ValueDist::StdNormal, 20.0, 0.01, true, &mut rng)
                .unwrap();
        let energy: f64 = inst.y.iter().map(|v| v * v).sum();
        assert_relative_eq!(energy, 1.4, max_relative = 1e-9);
    }

    #[test]
    fn noiseless_flag_gives_exact_filter_output() {
        let (_, f) = c6_identity_plus_laplacian();
        let f = Arc::new(f);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let support = SupportSet::new([0]);
        let inst =
            simulate_instance(&f, &support, ValueDist::UniformSplit, 10.0, 0.5, true, &mut rng)
                .unwrap();
        let hx = f.matrix().dot(&inst.x);
        assert_eq!(inst.y, hx);
        assert!(inst.x[0] != 0.0);
        assert!(inst.x.iter().skip(1).all(|&v| v == 0.0));
    }

    #[test]
    fn localized_supports_on_cycle_are_contiguous() {
        let g = cycle(6).unwrap();
        let t = g.geodesic_table();
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sup = draw_support(&g, Scenario::Localized, 3, &mut rng).unwrap();
            assert_eq!(sup.len(), 3);
            let center = sup
                .iter()
                .find(|&c| sup.iter().all(|m| t.dist(c, m) <= 1))
                .expect("localized support must have a center");
            assert!(g.degree(center) >= 2);
        }
    }

    #[test]
    fn mixed_supports_have_exact_size() {
        let g = crate::graph::grid2d(5, 5).unwrap();
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sup = draw_support(&g, Scenario::Mixed, 4, &mut rng).unwrap();
            assert_eq!(sup.len(), 4);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            draw_support(&g, Scenario::Mixed, 1, &mut rng).unwrap_err(),
            FilterError::MixedNeedsTwo(1)
        );
    }

    #[test]
    fn simulate_rejects_degenerate_inputs() {
        let (_, f) = c6_identity_plus_laplacian();
        let f = Arc::new(f);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let err = simulate_instance(
            &f,
            &SupportSet::empty(),
            ValueDist::StdNormal,
            0.0,
            0.01,
            false,
            &mut rng,
        )
        .unwrap_err();
        assert_eq!(err, FilterError::BadSparsity { s: 0, n: 6 });
        let err = simulate_instance(
            &f,
            &SupportSet::new([0]),
            ValueDist::StdNormal,
            0.0,
            0.0,
            false,
            &mut rng,
        )
        .unwrap_err();
        assert_eq!(err, FilterError::BadSigma(0.0));
    }
}
