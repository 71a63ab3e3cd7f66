//! Partitioning of crossing edges into independent marking buckets.
//!
//! A crossing edge can only be covered by a crossing edge with the same LCA,
//! and when that LCA is the root, only by one joining the same two root
//! subtrees. The key `F(u, v)` names exactly these classes:
//!
//! * `lca` when the LCA is not the root,
//! * `N` when an endpoint is the root,
//! * `N + 1 + S1 (S1 - 1) / 2 + S2` otherwise, with `S1 > S2` the root-subtree
//!   indices of the endpoints.
//!
//! Buckets never share mark slots (slots are keyed by bucket), so each one is
//! marked on its own worker without locks.

use rustc_hash::FxHashMap;

use super::{run_tasks_with, ThreadConfig};
use crate::graph::NodeId;
use crate::marking::{
    mark_crossing, BucketMarker, CrossingMarks, EdgeRecord, MarkScratch, MarkStore,
};
use crate::tree::RootedTree;
use crate::{Error, Result};

/// Partition key of the off-tree edge `(u, v)` whose LCA is `lca`.
pub fn partition_key(tree: &RootedTree, u: NodeId, v: NodeId, lca: NodeId) -> Result<u64> {
    let root = tree.root();
    let n = tree.node_count() as u64;
    if lca != root {
        return Ok(lca as u64);
    }
    if u == root || v == root {
        return Ok(n);
    }
    let (a, b) = (tree.subtree_id(u) as u64, tree.subtree_id(v) as u64);
    if a == b {
        return Err(Error::CorruptTree(format!(
            "({u}, {v}) meets at the root inside one root subtree"
        )));
    }
    let (s1, s2) = (a.max(b), a.min(b));
    Ok(n + 1 + s1 * (s1 - 1) / 2 + s2)
}

/// Root subtree pair `(S1, S2)` encoded by a root-pair key.
pub(crate) fn decode_root_pair(n: u64, key: u64) -> Option<(u32, u32)> {
    let mut rest = key.checked_sub(n + 1)?;
    // Largest s1 with s1 (s1 - 1) / 2 <= rest.
    let mut s1 = ((1.0 + (1.0 + 8.0 * rest as f64).sqrt()) / 2.0) as u64;
    while s1 * (s1.saturating_sub(1)) / 2 > rest {
        s1 -= 1;
    }
    while (s1 + 1) * s1 / 2 <= rest {
        s1 += 1;
    }
    rest -= s1 * (s1 - 1) / 2;
    Some((s1 as u32, rest as u32))
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PartitionPlan {
    /// `(key, ranks)` in ascending key order; ranks ascending within a bucket.
    pub buckets: Vec<(u64, Vec<u32>)>,
    /// Node count of the tree the plan was built on.
    pub n: u64,
}

impl PartitionPlan {
    pub fn bucket_count(&self) -> usize {
        self.buckets.len()
    }

    pub fn crossing_count(&self) -> usize {
        self.buckets.iter().map(|b| b.1.len()).sum()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.buckets.iter().map(|b| b.1.len()).collect()
    }
}

/// Buckets the crossing edges of `records` (in selection order) by
/// partition key. Non-crossing edges are left to recovery.
pub fn build_partitions(tree: &RootedTree, records: &[EdgeRecord]) -> Result<PartitionPlan> {
    let mut index: FxHashMap<u64, usize> = FxHashMap::default();
    let mut buckets: Vec<(u64, Vec<u32>)> = Vec::new();
    for (rank, r) in records.iter().enumerate() {
        if !r.is_crossing {
            continue;
        }
        let key = partition_key(tree, r.u, r.v, r.lca)?;
        let at = *index.entry(key).or_insert_with(|| {
            buckets.push((key, Vec::new()));
            buckets.len() - 1
        });
        buckets[at].1.push(rank as u32);
    }
    buckets.sort_unstable_by_key(|b| b.0);
    Ok(PartitionPlan {
        buckets,
        n: tree.node_count() as u64,
    })
}

/// Result of marking one bucket.
#[derive(Debug, Clone)]
pub struct BucketOutcome {
    pub key: u64,
    /// Marked flag per bucket edge, in bucket order.
    pub marked: Vec<bool>,
    pub marks: CrossingMarks,
}

fn mark_bucket(
    scratch: &mut MarkScratch,
    tree: &RootedTree,
    records: &[EdgeRecord],
    key: u64,
    ranks: &[u32],
) -> Result<BucketOutcome> {
    let mut marks = BucketMarker::new(scratch);
    let mut marked = Vec::with_capacity(ranks.len());
    for &rank in ranks {
        let r = &records[rank as usize];
        // Everything in the slots so far comes from earlier bucket edges.
        let hit = marks.intersects(r.u, r.v);
        if !hit {
            mark_crossing(&mut marks, tree, r, rank)?;
        }
        marked.push(hit);
    }
    Ok(BucketOutcome {
        key,
        marked,
        marks: marks.finish(),
    })
}

/// Marks every bucket on the worker pool (greedy dispatch by bucket size).
///
/// Returns a marked flag for every record (non-crossing ones are `false`)
/// and the store holding each bucket's marks. The result does not depend
/// on the worker count or the dispatch policy.
pub fn run_marking_parallel(
    plan: &PartitionPlan,
    records: &[EdgeRecord],
    tree: &RootedTree,
    config: &ThreadConfig,
) -> Result<(Vec<bool>, MarkStore)> {
    let sizes = plan.sizes();
    let outcomes = run_tasks_with(
        &plan.buckets,
        Some(&sizes),
        config,
        || MarkScratch::new(tree.node_count()),
        |scratch, (key, ranks)| mark_bucket(scratch, tree, records, *key, ranks),
    )?;
    let mut flags = vec![false; records.len()];
    let mut store = MarkStore::new();
    for (outcome, (_, ranks)) in outcomes.into_iter().zip(&plan.buckets) {
        let outcome = outcome?;
        for (&rank, &m) in ranks.iter().zip(&outcome.marked) {
            flags[rank as usize] = m;
        }
        let pair = decode_root_pair(plan.n, outcome.key);
        store.insert_bucket(outcome.key, outcome.marks, pair);
    }
    Ok((flags, store))
}
