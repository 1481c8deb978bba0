//! First-order support correction: a single sweep over the input support
//! that tries to swap each member for one of its graph neighbors whenever
//! the swap strictly improves the criterion.
//!
//! The sweep visits the (possibly truncated) input nodes in ascending order
//! while mutating a working copy, so the output criterion never falls below
//! the input's. Swapping onto a node already in the working set shrinks the
//! support; that is accepted when it improves the criterion.

use crate::gic::{GicConfig, GicError, GicEvaluator};
use crate::graph::{GeodesicTable, UNREACHABLE};
use crate::support::SupportSet;

use super::{finalize, RecoveryError, RecoveryResult};

/// Corrects `omega_in` by neighbor swaps within `radius` hops (radius 1 is
/// the plain first-order sweep; the filter order gives the wide variant).
/// Inputs larger than the sparsity budget are first truncated to the nodes
/// with the largest least-squares magnitudes. An empty input is returned
/// unchanged. Candidates whose columns are rank-deficient are treated as
/// unboundedly bad and never selected.
pub fn gfoc(
    ev: &mut GicEvaluator,
    cfg: &GicConfig,
    table: &GeodesicTable,
    omega_in: &SupportSet,
    radius: usize,
) -> Result<RecoveryResult, RecoveryError> {
    let n = ev.node_count();
    cfg.validate(n)?;
    if radius == 0 {
        return Err(RecoveryError::BadRadius);
    }
    if omega_in.is_empty() {
        return finalize(ev, cfg, "gfoc", SupportSet::empty(), true, 0);
    }
    if let Some(node) = omega_in.iter().find(|&k| k >= n) {
        return Err(GicError::NodeOutOfRange { node, n }.into());
    }

    let mut working = omega_in.clone();
    if working.len() > cfg.sparsity {
        let x = ev.ls_recover(&working)?;
        let mut ranked: Vec<(usize, f64)> =
            working.iter().zip(x.into_iter()).map(|(node, v)| (node, v.abs())).collect();
        ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        working = SupportSet::new(ranked.into_iter().take(cfg.sparsity).map(|(node, _)| node));
    }

    let mut rank_skips = 0u64;
    let mut current = match ev.gic(&working, cfg) {
        Ok(v) => v,
        Err(GicError::RankDeficient { .. }) => {
            rank_skips += 1;
            f64::NEG_INFINITY
        }
        Err(e) => return Err(e.into()),
    };

    let sweep: Vec<usize> = working.nodes().to_vec();
    for k in sweep {
        debug_assert!(working.contains(k));
        let base = working.with_removed(k);
        let mut best: Option<(f64, usize)> = None;
        for m in 0..n {
            let d = table.dist(k, m);
            if d == 0 || d == UNREACHABLE || d > radius as u32 {
                continue;
            }
            let candidate = base.with_inserted(m);
            match ev.gic(&candidate, cfg) {
                Ok(obj) => {
                    if best.map_or(true, |(b, _)| obj > b) {
                        best = Some((obj, m));
                    }
                }
                Err(GicError::RankDeficient { .. }) => rank_skips += 1,
                Err(e) => return Err(e.into()),
            }
        }
        if let Some((obj, m)) = best {
            if obj > current {
                working = base.with_inserted(m);
                current = obj;
            }
        }
    }

    finalize(ev, cfg, "gfoc", working, true, rank_skips)
}
