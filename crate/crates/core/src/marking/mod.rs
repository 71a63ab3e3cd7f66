//! Off-tree edge similarity marking.
//!
//! Off-tree edges are visited in descending resistance order. An edge that
//! no earlier selected edge covers is selected; a selected edge `(u, v)`
//! covers every off-tree edge `(x, y)` with `x` and `y` in opposite tree-hop
//! balls of radius `beta` around `u` and `v`.
//!
//! [`naive_mark_all`] is the direct quadratic reference. The production path
//! ([`mark_offtree`]) splits the work: crossing edges (whose LCA is neither
//! endpoint) can only be covered by crossing edges with the same LCA and the
//! same pair of root subtrees, so they are marked independently per
//! partition bucket on the worker pool. A sequential recovery pass then fixes
//! the effects of non-crossing edges, and the final selection equals the
//! reference exactly.

mod recovery;
mod store;

pub use recovery::{recover_noncrossing, RecoveryStats};
pub use store::{BucketMarker, CrossingMarks, MarkScratch, MarkStore, SparseBitmap, TokenMarks};

use crate::graph::{Edge, EdgeId, Graph, NodeId};
use crate::runtime::{
    build_partitions, partition_key, run_marking_parallel, run_tasks, uniform_ranges, ThreadConfig,
};
use crate::sortkit::{parallel_sort, SortItem, SortOrder, TopKPlan};
use crate::tree::RootedTree;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeRecord {
    /// Index of the edge in the input graph.
    pub id: EdgeId,
    pub u: NodeId,
    pub v: NodeId,
    pub w: f64,
    pub lca: NodeId,
    pub resistance_score: f64,
    pub is_crossing: bool,
    pub is_marked: bool,
    pub is_enforced: bool,
    pub is_withdrawn: bool,
    pub is_selected: bool,
}

impl EdgeRecord {
    pub fn new(id: EdgeId, edge: &Edge, tree: &RootedTree) -> Self {
        Self::with_lca(id, edge, tree, tree.lca_online(edge.u, edge.v))
    }

    /// Record for `edge` given its (already computed) LCA.
    pub fn with_lca(id: EdgeId, edge: &Edge, tree: &RootedTree, lca: NodeId) -> Self {
        Self {
            id,
            u: edge.u,
            v: edge.v,
            w: edge.w,
            lca,
            resistance_score: edge.w * tree.tree_resistance(edge.u, edge.v, lca),
            is_crossing: lca != edge.u && lca != edge.v,
            is_marked: false,
            is_enforced: false,
            is_withdrawn: false,
            is_selected: false,
        }
    }

    /// Coverage radius with the general (clamped) rule.
    pub fn beta(&self, tree: &RootedTree) -> u32 {
        compute_beta(tree, self.u, self.v, self.lca, false)
    }

    pub fn edge(&self) -> Edge {
        Edge::new(self.u, self.v, self.w)
    }
}

/// `min(depth u, depth v) - depth lca`, clamped to at least 1 unless
/// `crossing` (where it is at least 1 anyway).
pub fn compute_beta(tree: &RootedTree, u: NodeId, v: NodeId, lca: NodeId, crossing: bool) -> u32 {
    let b = tree.depth(u).min(tree.depth(v)) - tree.depth(lca);
    if crossing {
        b
    } else {
        b.max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageBall {
    pub center: NodeId,
    pub radius: u32,
    /// Members in breadth-first order from the center.
    pub nodes: Vec<NodeId>,
}

impl CoverageBall {
    pub fn contains(&self, v: NodeId) -> bool {
        self.nodes.contains(&v)
    }
}

/// Calls `f` on every node within `beta` tree hops of `center`.
///
/// The walk remembers where it came from instead of keeping a visited set,
/// which is enough on a tree and keeps the cost at the ball size.
pub fn for_each_in_ball(tree: &RootedTree, center: NodeId, beta: u32, mut f: impl FnMut(NodeId)) {
    let mut stack = vec![(center, center, 0u32)];
    while let Some((x, from, d)) = stack.pop() {
        f(x);
        if d < beta {
            tree.for_each_neighbor(x, |y| {
                if y != from {
                    stack.push((y, x, d + 1));
                }
            });
        }
    }
}

pub fn coverage_ball(tree: &RootedTree, center: NodeId, beta: u32) -> CoverageBall {
    let mut nodes = vec![center];
    let mut from = vec![center];
    let mut head = 0;
    let mut level_end = 1;
    let mut depth = 0;
    while head < nodes.len() && depth < beta {
        while head < level_end {
            let (x, prev) = (nodes[head], from[head]);
            tree.for_each_neighbor(x, |y| {
                if y != prev {
                    nodes.push(y);
                    from.push(x);
                }
            });
            head += 1;
        }
        level_end = nodes.len();
        depth += 1;
    }
    CoverageBall {
        center,
        radius: beta,
        nodes,
    }
}

/// Whether selected edge `e` covers the edge `(x, y)`, by explicit distance
/// tests against `e`'s balls.
pub fn covers(tree: &RootedTree, e: &EdgeRecord, x: NodeId, y: NodeId) -> bool {
    let beta = e.beta(tree);
    let near = |a: NodeId, b: NodeId| tree.hop_distance(a, b, tree.lca_online(a, b)) <= beta;
    (near(x, e.u) && near(y, e.v)) || (near(x, e.v) && near(y, e.u))
}

/// Reference marking: visit `records` in order; select each edge nobody has
/// marked yet and mark everything its balls cover. Returns the selection
/// flags by position. Quadratic; for cross-checking only.
pub fn naive_mark_all(tree: &RootedTree, records: &[EdgeRecord]) -> Vec<bool> {
    let n = tree.node_count();
    let mut marked = vec![false; records.len()];
    let mut selected = vec![false; records.len()];
    let mut in_u = vec![false; n];
    let mut in_v = vec![false; n];
    for (i, e) in records.iter().enumerate() {
        if marked[i] {
            continue;
        }
        selected[i] = true;
        let beta = e.beta(tree);
        let (bu, bv) = (
            coverage_ball(tree, e.u, beta),
            coverage_ball(tree, e.v, beta),
        );
        bu.nodes.iter().for_each(|&x| in_u[x as usize] = true);
        bv.nodes.iter().for_each(|&x| in_v[x as usize] = true);
        for (j, f) in records.iter().enumerate() {
            let (x, y) = (f.u as usize, f.v as usize);
            if (in_u[x] && in_v[y]) || (in_v[x] && in_u[y]) {
                marked[j] = true;
            }
        }
        bu.nodes.iter().for_each(|&x| in_u[x as usize] = false);
        bv.nodes.iter().for_each(|&x| in_v[x as usize] = false);
    }
    selected
}

/// Adds the tokens of the edge at `rank`: side 1 on its first endpoint's
/// ball, side 2 on the second's.
pub fn mark_linear(tokens: &mut TokenMarks, tree: &RootedTree, e: &EdgeRecord, rank: u32) {
    let beta = e.beta(tree);
    for_each_in_ball(tree, e.u, beta, |x| tokens.add(x, rank, 1));
    for_each_in_ball(tree, e.v, beta, |y| tokens.add(y, rank, 2));
}

pub(crate) fn unmark_linear(tokens: &mut TokenMarks, tree: &RootedTree, e: &EdgeRecord, rank: u32) {
    let beta = e.beta(tree);
    for_each_in_ball(tree, e.u, beta, |x| tokens.remove(x, rank, 1));
    for_each_in_ball(tree, e.v, beta, |y| tokens.remove(y, rank, 2));
}

/// Whether any token edge covers `(u, v)`.
pub fn check_linear(tokens: &TokenMarks, u: NodeId, v: NodeId) -> bool {
    tokens.covered_below(u, v, u32::MAX)
}

/// Adds the crossing edge at `rank` to the slots of every node in its two
/// balls.
pub fn mark_crossing(
    marks: &mut BucketMarker,
    tree: &RootedTree,
    e: &EdgeRecord,
    rank: u32,
) -> Result<()> {
    if !e.is_crossing {
        return Err(Error::NotCrossing(e.id));
    }
    let beta = compute_beta(tree, e.u, e.v, e.lca, true);
    let seq = marks.open(rank);
    for_each_in_ball(tree, e.u, beta, |x| marks.add(x, seq));
    for_each_in_ball(tree, e.v, beta, |y| marks.add(y, seq));
    Ok(())
}

/// Whether an edge of rank below `rank`, present in the crossing store and
/// accepted by `live`, covers `records[rank]`.
///
/// For a crossing edge this is a plain slot intersection in its own bucket.
/// A non-crossing edge `(a, d)` can only be covered by crossing edges whose
/// LCA is the ancestor endpoint `a`; those candidates are confirmed with an
/// explicit ball test.
pub fn check_crossing(
    store: &MarkStore,
    tree: &RootedTree,
    records: &[EdgeRecord],
    rank: u32,
    live: impl Fn(u32) -> bool,
) -> Result<bool> {
    let f = &records[rank as usize];
    if f.is_crossing {
        let key = partition_key(tree, f.u, f.v, f.lca)?;
        return Ok(store
            .bucket(key)
            .is_some_and(|m| m.any_common_below(f.u, f.v, rank, &live)));
    }
    let (a, d) = if f.lca == f.u { (f.u, f.v) } else { (f.v, f.u) };
    let confirm = |m: &CrossingMarks| {
        m.any_common_below(a, d, rank, |q| {
            live(q) && covers(tree, &records[q as usize], a, d)
        })
    };
    if a != tree.root() {
        return Ok(store.bucket(a as u64).is_some_and(confirm));
    }
    let keys = store.root_pairs.get(&tree.subtree_id(d));
    Ok(keys.is_some_and(|keys| keys.iter().filter_map(|&k| store.bucket(k)).any(confirm)))
}

/// Builds the off-tree edge records (LCA and resistance score) on the
/// worker pool, in the order of `off_tree`.
pub fn resistance_records(
    graph: &Graph,
    tree: &RootedTree,
    off_tree: &[EdgeId],
    config: &ThreadConfig,
) -> Result<Vec<EdgeRecord>> {
    let ranges = uniform_ranges(off_tree.len(), config.workers);
    let parts = run_tasks(&ranges, None, config, |range| {
        off_tree[range.clone()]
            .iter()
            .map(|&id| EdgeRecord::new(id, graph.edge(id), tree))
            .collect::<Vec<_>>()
    })?;
    Ok(parts.concat())
}

/// Stable descending order of `records` by resistance score: the positions
/// into `records` in selection order.
pub fn resistance_order(
    records: &[EdgeRecord],
    workers: usize,
    top_k: Option<usize>,
) -> Result<Vec<u32>> {
    let items: Vec<SortItem> = records
        .iter()
        .enumerate()
        .map(|(i, r)| SortItem::new(r.resistance_score, i as u32))
        .collect();
    let plan = top_k
        .map(|k| TopKPlan::new(k.min(items.len()), workers))
        .transpose()?;
    let runs = parallel_sort(&items, workers, SortOrder::Descending, plan)?;
    Ok(runs.into_cursor().map(|it| it.payload).collect())
}

#[derive(Debug, Clone, Default)]
pub struct MarkingOutcome {
    pub store: MarkStore,
    pub crossing: usize,
    pub buckets: usize,
    pub recovery: RecoveryStats,
}

/// Marks `records` (already in selection order) and sets `is_selected` on
/// the survivors. The result equals [`naive_mark_all`] for any worker count.
pub fn mark_offtree(
    tree: &RootedTree,
    records: &mut [EdgeRecord],
    config: &ThreadConfig,
) -> Result<MarkingOutcome> {
    if records.len() >= u32::MAX as usize {
        return Err(Error::InvalidConfig("too many off-tree edges".into()));
    }
    for r in records.iter_mut() {
        r.is_marked = false;
        r.is_enforced = false;
        r.is_withdrawn = false;
        r.is_selected = false;
    }
    let started = std::time::Instant::now();
    let plan = build_partitions(tree, records)?;
    let (flags, mut store) = run_marking_parallel(&plan, records, tree, config)?;
    let crossing_done = started.elapsed();
    for (r, &marked) in records.iter_mut().zip(&flags) {
        r.is_marked = marked;
    }

    // Non-crossing edges start from the crossing-stage view as well.
    let stage: Vec<bool> = records.iter().map(|r| r.is_marked).collect();
    for rank in 0..records.len() {
        if !records[rank].is_crossing {
            let hit = check_crossing(&store, tree, records, rank as u32, |q| {
                let q = q as usize;
                records[q].is_crossing && !stage[q]
            })?;
            records[rank].is_marked = hit;
        }
    }

    let initial_done = started.elapsed();
    let recovery = recover_noncrossing(records, &mut store, tree)?;
    log::debug!(
        "marking: {} crossing in {} buckets {:?}, non-crossing check {:?}, recovery {:?} ({recovery:?})",
        plan.crossing_count(),
        plan.bucket_count(),
        crossing_done,
        initial_done - crossing_done,
        started.elapsed() - initial_done,
    );
    for r in records.iter_mut() {
        r.is_selected = !r.is_marked;
    }
    Ok(MarkingOutcome {
        crossing: plan.crossing_count(),
        buckets: plan.bucket_count(),
        store,
        recovery,
    })
}
