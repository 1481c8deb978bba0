//! Greedy and convex baselines: orthogonal matching pursuit and an
//! l1-penalized least-squares solve by cyclic coordinate descent.

use ndarray::Array1;

use crate::gic::{GicConfig, GicEvaluator};
use crate::support::SupportSet;

use super::{finalize, RecoveryError, RecoveryResult};

/// Orthogonal matching pursuit. Greedily adds the node whose normalized
/// column correlation with the residual is largest (ties: smallest index),
/// re-projecting after each pick. Stops at the sparsity budget or once the
/// squared residual drops to `n * sigma_n^2`.
pub fn omp(ev: &mut GicEvaluator, cfg: &GicConfig) -> Result<RecoveryResult, RecoveryError> {
    let n = ev.node_count();
    cfg.validate(n)?;
    let threshold = n as f64 * cfg.sigma_n * cfg.sigma_n;

    let mut support = SupportSet::empty();
    let mut residual = ev.y().clone();
    let mut rank_skips = 0u64;

    while support.len() < cfg.sparsity {
        let rsq: f64 = residual.iter().map(|v| v * v).sum();
        if rsq <= threshold {
            break;
        }
        let mut best: Option<(f64, usize)> = None;
        for k in 0..n {
            if support.contains(k) || ev.column_sq_norm(k) == 0.0 {
                continue;
            }
            let corr = ev.column_dot(k, &residual).abs() / ev.column_sq_norm(k).sqrt();
            if best.map_or(true, |(b, _)| corr > b) {
                best = Some((corr, k));
            }
        }
        let Some((corr, k)) = best else {
            break;
        };
        if corr == 0.0 {
            break;
        }
        let grown = support.with_inserted(k);
        match ev.project_onto(&grown) {
            Ok(projection) => {
                residual = ev.y() - &projection;
                support = grown;
            }
            Err(crate::gic::GicError::RankDeficient { .. }) => {
                rank_skips += 1;
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }

    finalize(ev, cfg, "omp", support, true, rank_skips)
}

/// Tuning for the coordinate-descent l1 solve.
#[derive(Debug, Clone, Copy)]
pub struct LassoSettings {
    pub lambda: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for LassoSettings {
    fn default() -> Self {
        LassoSettings { lambda: 0.01, max_iter: 100_000, tol: 1e-8 }
    }
}

/// Minimizes `0.5 ||y - H x||^2 + lambda ||x||_1` by cyclic coordinate
/// descent, then keeps the (up to) `cfg.sparsity` largest-magnitude nonzero
/// coordinates as the support and re-fits them by least squares. `converged`
/// reports whether the sweep deltas fell below `tol` before `max_iter`.
pub fn lasso(
    ev: &mut GicEvaluator,
    cfg: &GicConfig,
    settings: &LassoSettings,
) -> Result<RecoveryResult, RecoveryError> {
    let n = ev.node_count();
    cfg.validate(n)?;
    if !(settings.lambda > 0.0) || !settings.lambda.is_finite() {
        return Err(RecoveryError::BadLambda(settings.lambda));
    }

    let mut x = vec![0.0f64; n];
    let mut residual: Array1<f64> = ev.y().clone();
    let mut converged = false;

    for _ in 0..settings.max_iter {
        let mut max_step = 0.0f64;
        for j in 0..n {
            let a = ev.column_sq_norm(j);
            if a == 0.0 {
                continue;
            }
            let c = ev.column_dot(j, &residual) + a * x[j];
            let xn = soft_threshold(c, settings.lambda) / a;
            let step = xn - x[j];
            if step != 0.0 {
                let col = ev.column(j);
                residual.iter_mut().zip(col.iter()).for_each(|(r, h)| *r -= step * h);
                x[j] = xn;
            }
            max_step = max_step.max(step.abs());
        }
        let max_x = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if max_step <= settings.tol * max_x.max(1.0) {
            converged = true;
            break;
        }
    }

    let mut ranked: Vec<(usize, f64)> = x
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(j, v)| (j, v.abs()))
        .collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let support = SupportSet::new(ranked.into_iter().take(cfg.sparsity).map(|(j, _)| j));

    finalize(ev, cfg, "lasso", support, converged, 0)
}

fn soft_threshold(c: f64, lambda: f64) -> f64 {
    c.signum() * (c.abs() - lambda).max(0.0)
}
