use std::collections::BTreeSet;

use super::{run_pipeline, PipelineConfig};
use crate::graph::{EdgeId, Graph, SplitMix64};
use crate::marking::{naive_mark_all, EdgeRecord};
use crate::tree::oracle::{GroundedLaplacian, ORACLE_MAX_NODES};
use crate::{Error, Result};

/// Relative tolerance for tree resistances against the dense solve.
pub const RESISTANCE_TOLERANCE: f64 = 1e-9;

/// Off-tree edges whose resistance is cross-checked per run.
const RESISTANCE_SAMPLES: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub n: usize,
    pub off_tree: usize,
    pub selected: usize,
    pub oracle_selected: usize,
    /// Smallest edge id selected by exactly one side.
    pub first_mismatch: Option<EdgeId>,
    pub resistance_checks: usize,
    pub max_resistance_deviation: f64,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.first_mismatch.is_none() && self.max_resistance_deviation <= RESISTANCE_TOLERANCE
    }
}

/// Runs the pipeline and the quadratic reference on the same spanning tree
/// and compares the selections; also spot-checks tree resistances against a
/// dense Laplacian solve.
pub fn verify(graph: &Graph, config: &PipelineConfig) -> Result<VerifyReport> {
    verify_with_fault(graph, config, None)
}

/// [`verify`] with a deliberately flipped selection flag on edge `fault`,
/// to exercise the failure path.
pub fn verify_with_fault(
    graph: &Graph,
    config: &PipelineConfig,
    fault: Option<EdgeId>,
) -> Result<VerifyReport> {
    let n = graph.node_count();
    if n > ORACLE_MAX_NODES {
        return Err(Error::InvalidConfig(format!(
            "verification needs at most {ORACLE_MAX_NODES} nodes, got {n}"
        )));
    }
    let run = run_pipeline(graph, config)?;
    let tree = &run.tree;

    let mut in_tree = vec![false; graph.edge_count()];
    for &id in &run.tree_edge_ids {
        in_tree[id as usize] = true;
    }
    let mut records: Vec<EdgeRecord> = graph
        .edges()
        .iter()
        .enumerate()
        .filter(|(id, _)| !in_tree[*id])
        .map(|(id, e)| EdgeRecord::with_lca(id as EdgeId, e, tree, tree.lca(e.u, e.v)))
        .collect();
    records.sort_by(|a, b| {
        b.resistance_score
            .total_cmp(&a.resistance_score)
            .then(a.id.cmp(&b.id))
    });
    let flags = naive_mark_all(tree, &records);
    let expected: BTreeSet<EdgeId> = records
        .iter()
        .zip(&flags)
        .filter(|(_, &s)| s)
        .map(|(r, _)| r.id)
        .take(config.budget.unwrap_or(usize::MAX))
        .collect();

    let mut got: BTreeSet<EdgeId> = run.selected_ids.iter().copied().collect();
    if let Some(id) = fault {
        if !got.remove(&id) {
            got.insert(id);
        }
    }
    let first_mismatch = got.symmetric_difference(&expected).next().copied();

    let lap = GroundedLaplacian::new(n, &tree.edges().collect::<Vec<_>>())?;
    let mut rng = SplitMix64::new(config.seed);
    let mut max_dev: f64 = 0.0;
    let checks = RESISTANCE_SAMPLES.min(records.len());
    for _ in 0..checks {
        let r = &records[rng.below(records.len() as u64) as usize];
        let fast = r.resistance_score / r.w;
        let dense = lap.resistance(r.u, r.v);
        max_dev = max_dev.max((fast - dense).abs() / fast.abs().max(f64::MIN_POSITIVE));
    }

    Ok(VerifyReport {
        n,
        off_tree: records.len(),
        selected: got.len(),
        oracle_selected: expected.len(),
        first_mismatch,
        resistance_checks: checks,
        max_resistance_deviation: max_dev,
    })
}
