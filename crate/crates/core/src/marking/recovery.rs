use super::{check_crossing, for_each_in_ball, mark_linear, unmark_linear, EdgeRecord, MarkStore};
use crate::graph::NodeId;
use crate::tree::RootedTree;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RecoveryStats {
    pub sweeps: usize,
    pub rechecks: usize,
    pub flips: usize,
}

/// Off-tree adjacency: for every node, the `(other endpoint, rank)` pairs of
/// its off-tree edges.
struct OffTreeAdjacency {
    offsets: Vec<u32>,
    items: Vec<(NodeId, u32)>,
}

impl OffTreeAdjacency {
    fn new(n: usize, records: &[EdgeRecord]) -> Self {
        let mut offsets = vec![0u32; n + 1];
        for r in records {
            offsets[r.u as usize + 1] += 1;
            offsets[r.v as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut items = vec![(0, 0); 2 * records.len()];
        for (rank, r) in records.iter().enumerate() {
            for (a, b) in [(r.u, r.v), (r.v, r.u)] {
                items[fill[a as usize] as usize] = (b, rank as u32);
                fill[a as usize] += 1;
            }
        }
        Self { offsets, items }
    }

    fn of(&self, v: NodeId) -> &[(NodeId, u32)] {
        &self.items[self.offsets[v as usize] as usize..self.offsets[v as usize + 1] as usize]
    }
}

/// Scratch for enumerating the edges an edge covers.
struct CoverScan {
    stamp: Vec<u32>,
    tag: u32,
    ball: Vec<NodeId>,
}

impl CoverScan {
    /// Calls `f` on the rank of every off-tree edge after `rank` that `e`
    /// covers.
    fn for_each_covered(
        &mut self,
        tree: &RootedTree,
        adj: &OffTreeAdjacency,
        e: &EdgeRecord,
        rank: u32,
        mut f: impl FnMut(u32),
    ) {
        self.tag = self.tag.wrapping_add(1);
        if self.tag == 0 {
            self.stamp.fill(0);
            self.tag = 1;
        }
        let beta = e.beta(tree);
        let (stamp, tag) = (&mut self.stamp, self.tag);
        for_each_in_ball(tree, e.v, beta, |y| stamp[y as usize] = tag);
        self.ball.clear();
        let ball = &mut self.ball;
        for_each_in_ball(tree, e.u, beta, |x| ball.push(x));
        for &x in self.ball.iter() {
            for &(y, q) in adj.of(x) {
                if q > rank && self.stamp[y as usize] == tag {
                    f(q);
                }
            }
        }
    }
}

/// Sequential pass over all off-tree edges (in selection order) that fixes
/// the crossing-stage flags.
///
/// An edge is rechecked against everything selected before it when its flag
/// is suspect: marked while some edge that marked it was dropped
/// (`is_enforced`), or unmarked while a new selected edge covers it
/// (`is_withdrawn`). Unmarked non-crossing edges and every flipped edge push
/// those flags onto the edges they cover. Passes repeat until one finishes
/// without flips.
pub fn recover_noncrossing(
    records: &mut [EdgeRecord],
    store: &mut MarkStore,
    tree: &RootedTree,
) -> Result<RecoveryStats> {
    let len = records.len();
    let adj = OffTreeAdjacency::new(tree.node_count(), records);
    let mut scan = CoverScan {
        stamp: vec![0; tree.node_count()],
        tag: 0,
        ball: Vec::new(),
    };
    // Crossing edges selected by the crossing stage live in the crossing
    // store; every other selected edge carries tokens.
    let in_crossing_store: Vec<bool> = records
        .iter()
        .map(|r| r.is_crossing && !r.is_marked)
        .collect();
    let mut has_tokens = vec![false; len];
    let mut stats = RecoveryStats::default();

    loop {
        stats.sweeps += 1;
        if stats.sweeps > len + 1 {
            return Err(Error::NoConvergence(len + 1));
        }
        let first = stats.sweeps == 1;
        let mut flipped_any = false;
        for rank in 0..len {
            let r = records[rank];
            let mut flipped = false;
            if (r.is_marked && r.is_enforced) || (!r.is_marked && r.is_withdrawn) {
                stats.rechecks += 1;
                let flag = store.tokens.covered_below(r.u, r.v, rank as u32)
                    || check_crossing(store, tree, records, rank as u32, |q| {
                        in_crossing_store[q as usize] && !records[q as usize].is_marked
                    })?;
                if flag != r.is_marked {
                    flipped = true;
                    records[rank].is_marked = flag;
                }
            }
            let marked = records[rank].is_marked;
            if flipped || (first && !r.is_crossing && !marked) {
                scan.for_each_covered(tree, &adj, &r, rank as u32, |q| {
                    let e = &mut records[q as usize];
                    if marked {
                        e.is_enforced = true;
                    } else {
                        e.is_withdrawn = true;
                    }
                });
            }
            let wants_tokens = !marked && !in_crossing_store[rank];
            if wants_tokens != has_tokens[rank] {
                if wants_tokens {
                    mark_linear(&mut store.tokens, tree, &r, rank as u32);
                } else {
                    unmark_linear(&mut store.tokens, tree, &r, rank as u32);
                }
                has_tokens[rank] = wants_tokens;
            }
            if flipped {
                stats.flips += 1;
                flipped_any = true;
            }
        }
        if !flipped_any {
            return Ok(stats);
        }
    }
}
