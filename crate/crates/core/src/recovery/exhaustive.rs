//! Exhaustive GIC maximization over all supports up to the sparsity budget.

use crate::gic::{GicConfig, GicEvaluator};
use crate::support::SupportSet;

use super::{finalize, RecoveryError, RecoveryResult};

/// Maximizes the GIC over every subset of `candidates` (all nodes when
/// `None`) with cardinality at most `cfg.sparsity`. The empty support, with
/// criterion 0, is always a candidate; ties prefer smaller supports, then
/// lexicographic order. Rank-deficient subsets are skipped and tallied in
/// `rank_skips`.
pub fn exhaustive_gic(
    ev: &mut GicEvaluator,
    cfg: &GicConfig,
    candidates: Option<&SupportSet>,
) -> Result<RecoveryResult, RecoveryError> {
    cfg.validate(ev.node_count())?;
    let all;
    let cands = match candidates {
        Some(c) => c,
        None => {
            all = SupportSet::new(0..ev.node_count());
            &all
        }
    };
    let out = ev.search_best_subset(cands, cfg.sparsity, cfg)?;
    finalize(ev, cfg, "exhaustive", out.support, true, out.rank_skips)
}
