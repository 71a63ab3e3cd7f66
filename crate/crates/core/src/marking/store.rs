//! Mark sets over off-tree edge ranks.
//!
//! Every off-tree edge is identified by its rank in the resistance order, and
//! every mark set is a sparse bitmap over ranks: a sorted list of
//! `(word index, 64-bit word)` pairs. Marks are mostly appended in rank order,
//! which keeps insertion O(1), and intersection is a merge over the word
//! lists followed by a word-wide AND.

use rustc_hash::FxHashMap;

use crate::graph::NodeId;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SparseBitmap {
    words: Vec<(u32, u64)>,
}

impl SparseBitmap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.1.count_ones() as usize).sum()
    }

    pub fn insert(&mut self, bit: u32) {
        let (idx, mask) = (bit / 64, 1u64 << (bit % 64));
        match self.words.last_mut() {
            Some(last) if last.0 == idx => last.1 |= mask,
            Some(last) if last.0 > idx => match self.words.binary_search_by_key(&idx, |w| w.0) {
                Ok(at) => self.words[at].1 |= mask,
                Err(at) => self.words.insert(at, (idx, mask)),
            },
            _ => self.words.push((idx, mask)),
        }
    }

    pub fn remove(&mut self, bit: u32) {
        let (idx, mask) = (bit / 64, 1u64 << (bit % 64));
        if let Ok(at) = self.words.binary_search_by_key(&idx, |w| w.0) {
            self.words[at].1 &= !mask;
            if self.words[at].1 == 0 {
                self.words.remove(at);
            }
        }
    }

    pub fn contains(&self, bit: u32) -> bool {
        let (idx, mask) = (bit / 64, 1u64 << (bit % 64));
        self.words
            .binary_search_by_key(&idx, |w| w.0)
            .is_ok_and(|at| self.words[at].1 & mask != 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.words.iter().flat_map(|&(idx, mut word)| {
            std::iter::from_fn(move || {
                (word != 0).then(|| {
                    let b = word.trailing_zeros();
                    word &= word - 1;
                    idx * 64 + b
                })
            })
        })
    }

    /// True if some bit below `limit` is set in both maps and accepted by
    /// `accept`. Bits are offered in ascending order.
    pub fn any_common_below(
        &self,
        other: &SparseBitmap,
        limit: u32,
        mut accept: impl FnMut(u32) -> bool,
    ) -> bool {
        let (a, b) = (&self.words, &other.words);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            let (ia, ib) = (a[i].0, b[j].0);
            if ia < ib {
                i += 1;
            } else if ib < ia {
                j += 1;
            } else {
                if ia * 64 >= limit {
                    return false;
                }
                let mut word = a[i].1 & b[j].1;
                if limit - ia * 64 < 64 {
                    word &= (1u64 << (limit - ia * 64)) - 1;
                }
                while word != 0 {
                    let bit = ia * 64 + word.trailing_zeros();
                    if accept(bit) {
                        return true;
                    }
                    word &= word - 1;
                }
                i += 1;
                j += 1;
            }
        }
        false
    }

    /// True if the maps share any set bit.
    pub fn intersects(&self, other: &SparseBitmap) -> bool {
        self.any_common_below(other, u32::MAX, |_| true)
    }
}

const UNSEEN: u32 = u32::MAX;

fn common_below(
    a: &SparseBitmap,
    b: &SparseBitmap,
    ranks: &[u32],
    limit: u32,
    mut accept: impl FnMut(u32) -> bool,
) -> bool {
    let local = ranks.partition_point(|&r| r < limit) as u32;
    a.any_common_below(b, local, |s| accept(ranks[s as usize]))
}

/// Crossing-stage marks of one partition bucket: node to the set of
/// selected edges whose coverage balls contain it.
///
/// Slots hold bucket-local sequence numbers, which keeps the bitmaps dense;
/// `ranks` maps them back to global ranks and is ascending.
#[derive(Debug, Clone, Default)]
pub struct CrossingMarks {
    nodes: Vec<NodeId>,
    slots: Vec<SparseBitmap>,
    ranks: Vec<u32>,
}

static EMPTY: SparseBitmap = SparseBitmap { words: Vec::new() };

impl CrossingMarks {
    pub fn slot(&self, node: NodeId) -> &SparseBitmap {
        match self.nodes.binary_search(&node) {
            Ok(at) => &self.slots[at],
            Err(_) => &EMPTY,
        }
    }

    /// Global ranks of the edges whose balls contain `node`.
    pub fn ranks_at(&self, node: NodeId) -> impl Iterator<Item = u32> + '_ {
        self.slot(node).iter().map(|s| self.ranks[s as usize])
    }

    /// True if some edge of rank below `limit`, accepted by `accept`, has
    /// both `u` and `v` in its balls.
    pub fn any_common_below(
        &self,
        u: NodeId,
        v: NodeId,
        limit: u32,
        accept: impl FnMut(u32) -> bool,
    ) -> bool {
        common_below(self.slot(u), self.slot(v), &self.ranks, limit, accept)
    }

    pub fn intersects(&self, u: NodeId, v: NodeId) -> bool {
        self.slot(u).intersects(self.slot(v))
    }

    /// Nodes with a non-empty slot, ascending.
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }
}

/// Dense node-to-slot index, reused by one worker across buckets.
#[derive(Debug, Clone)]
pub struct MarkScratch {
    index: Vec<u32>,
}

impl MarkScratch {
    pub fn new(n: usize) -> Self {
        Self {
            index: vec![UNSEEN; n],
        }
    }
}

/// Builds the [`CrossingMarks`] of one bucket on top of a [`MarkScratch`].
#[derive(Debug)]
pub struct BucketMarker<'s> {
    index: &'s mut [u32],
    marks: CrossingMarks,
}

impl<'s> BucketMarker<'s> {
    pub fn new(scratch: &'s mut MarkScratch) -> Self {
        Self {
            index: &mut scratch.index,
            marks: CrossingMarks::default(),
        }
    }

    /// Registers the edge of global `rank` and returns its local sequence
    /// number. Ranks must arrive in ascending order.
    pub fn open(&mut self, rank: u32) -> u32 {
        let ranks = &mut self.marks.ranks;
        assert!(ranks.last().is_none_or(|&r| r < rank), "ranks must ascend");
        ranks.push(rank);
        (ranks.len() - 1) as u32
    }

    pub fn add(&mut self, node: NodeId, seq: u32) {
        let at = &mut self.index[node as usize];
        if *at == UNSEEN {
            *at = self.marks.nodes.len() as u32;
            self.marks.nodes.push(node);
            self.marks.slots.push(SparseBitmap::new());
        }
        self.marks.slots[*at as usize].insert(seq);
    }

    fn slot(&self, node: NodeId) -> &SparseBitmap {
        match self.index[node as usize] {
            UNSEEN => &EMPTY,
            at => &self.marks.slots[at as usize],
        }
    }

    pub fn intersects(&self, u: NodeId, v: NodeId) -> bool {
        self.slot(u).intersects(self.slot(v))
    }

    /// Clears the scratch index and returns the bucket's marks.
    pub fn finish(self) -> CrossingMarks {
        let CrossingMarks {
            nodes,
            slots,
            ranks,
        } = self.marks;
        for &x in &nodes {
            self.index[x as usize] = UNSEEN;
        }
        let mut pairs: Vec<(NodeId, SparseBitmap)> = nodes.into_iter().zip(slots).collect();
        pairs.sort_unstable_by_key(|p| p.0);
        let (nodes, slots) = pairs.into_iter().unzip();
        CrossingMarks {
            nodes,
            slots,
            ranks,
        }
    }
}

/// Per-node token sets of the all-edge marking: `side1[x]` holds edges whose
/// first-endpoint ball contains `x`, `side2[x]` those whose second-endpoint
/// ball does.
#[derive(Debug, Clone, Default)]
pub struct TokenMarks {
    side1: FxHashMap<NodeId, SparseBitmap>,
    side2: FxHashMap<NodeId, SparseBitmap>,
}

impl TokenMarks {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, node: NodeId, rank: u32, side: u8) {
        let map = if side == 1 {
            &mut self.side1
        } else {
            &mut self.side2
        };
        map.entry(node).or_default().insert(rank);
    }

    pub fn remove(&mut self, node: NodeId, rank: u32, side: u8) {
        let map = if side == 1 {
            &mut self.side1
        } else {
            &mut self.side2
        };
        if let Some(set) = map.get_mut(&node) {
            set.remove(rank);
        }
    }

    pub fn contains(&self, node: NodeId, rank: u32, side: u8) -> bool {
        let map = if side == 1 { &self.side1 } else { &self.side2 };
        map.get(&node).is_some_and(|s| s.contains(rank))
    }

    fn get(&self, node: NodeId, side: u8) -> &SparseBitmap {
        let map = if side == 1 { &self.side1 } else { &self.side2 };
        map.get(&node).unwrap_or(&EMPTY)
    }

    /// True if some token edge of rank below `limit` has its two balls on
    /// `u` and `v` in either orientation.
    pub fn covered_below(&self, u: NodeId, v: NodeId, limit: u32) -> bool {
        self.get(u, 1)
            .any_common_below(self.get(v, 2), limit, |_| true)
            || self
                .get(u, 2)
                .any_common_below(self.get(v, 1), limit, |_| true)
    }
}

/// All marks of a marking run: crossing marks per partition key, plus the
/// token sets used by recovery.
#[derive(Debug, Clone, Default)]
pub struct MarkStore {
    pub(crate) crossing: FxHashMap<u64, CrossingMarks>,
    /// Root-pair partition keys grouped by the root subtrees they touch.
    pub(crate) root_pairs: FxHashMap<u32, Vec<u64>>,
    pub tokens: TokenMarks,
}

impl MarkStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bucket(&self, key: u64) -> Option<&CrossingMarks> {
        self.crossing.get(&key)
    }

    pub(crate) fn insert_bucket(
        &mut self,
        key: u64,
        marks: CrossingMarks,
        pair: Option<(u32, u32)>,
    ) {
        if let Some((s1, s2)) = pair {
            self.root_pairs.entry(s1).or_default().push(key);
            self.root_pairs.entry(s2).or_default().push(key);
        }
        self.crossing.insert(key, marks);
    }

    pub fn bucket_count(&self) -> usize {
        self.crossing.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::SplitMix64;
    use std::collections::HashSet;

    #[test]
    fn bitmap_basics() {
        let mut b = SparseBitmap::new();
        assert!(b.is_empty());
        for bit in [0, 63, 64, 1000, 5] {
            b.insert(bit);
        }
        b.insert(5);
        assert_eq!(b.len(), 5);
        assert_eq!(b.iter().collect::<Vec<_>>(), vec![0, 5, 63, 64, 1000]);
        assert!(b.contains(1000) && !b.contains(999));
        b.remove(64);
        b.remove(64);
        assert_eq!(b.iter().collect::<Vec<_>>(), vec![0, 5, 63, 1000]);
    }

    #[test]
    fn intersection_respects_limit() {
        let mut a = SparseBitmap::new();
        let mut b = SparseBitmap::new();
        for bit in [3, 70, 200] {
            a.insert(bit);
        }
        for bit in [70, 200, 300] {
            b.insert(bit);
        }
        assert!(a.intersects(&b));
        assert!(!a.any_common_below(&b, 70, |_| true));
        assert!(a.any_common_below(&b, 71, |_| true));
        assert!(a.any_common_below(&b, 1000, |bit| bit == 200));
        assert!(!a.any_common_below(&b, 1000, |bit| bit == 3));
    }

    #[test]
    fn membership_matches_hash_sets() {
        let mut rng = SplitMix64::new(8);
        for _ in 0..200 {
            let universe = 1 + rng.below(700) as u32;
            let mut maps = [SparseBitmap::new(), SparseBitmap::new()];
            let mut sets = [HashSet::new(), HashSet::new()];
            for _ in 0..rng.below(400) {
                let which = rng.below(2) as usize;
                let bit = rng.below(universe as u64) as u32;
                if rng.below(4) == 0 {
                    maps[which].remove(bit);
                    sets[which].remove(&bit);
                } else {
                    maps[which].insert(bit);
                    sets[which].insert(bit);
                }
            }
            for bit in 0..universe {
                assert_eq!(maps[0].contains(bit), sets[0].contains(&bit));
            }
            let limit = rng.below(universe as u64 + 1) as u32;
            let expected = sets[0].iter().any(|b| *b < limit && sets[1].contains(b));
            assert_eq!(
                maps[0].any_common_below(&maps[1], limit, |_| true),
                expected
            );
            let mut sorted: Vec<u32> = sets[1].iter().copied().collect();
            sorted.sort_unstable();
            assert_eq!(maps[1].iter().collect::<Vec<_>>(), sorted);
        }
    }

    #[test]
    fn crossing_marks_translate_ranks() {
        let mut scratch = MarkScratch::new(5);
        let mut b = BucketMarker::new(&mut scratch);
        let s = b.open(4);
        b.add(3, s);
        b.add(1, s);
        b.add(2, s);
        assert!(b.intersects(1, 2) && !b.intersects(1, 4));
        let s = b.open(9);
        b.add(1, s);
        b.add(3, s);
        let m = b.finish();
        assert!(scratch.index.iter().all(|&i| i == UNSEEN));
        assert_eq!(m.ranks_at(1).collect::<Vec<_>>(), vec![4, 9]);
        assert!(m.intersects(1, 2) && m.intersects(1, 3) && m.intersects(2, 3));
        assert!(!m.any_common_below(2, 3, 9, |r| r != 4));
        assert!(!m.any_common_below(1, 3, 4, |_| true));
        assert!(!m.any_common_below(1, 3, 9, |r| r != 4));
        assert!(m.any_common_below(1, 3, 10, |r| r != 4));
        assert!(!m.any_common_below(1, 2, 100, |r| r != 4));
        assert_eq!(m.nodes(), &[1, 2, 3]);
        assert!(m.slot(4).is_empty());
    }

    #[test]
    #[should_panic(expected = "ranks must ascend")]
    fn crossing_marks_reject_descending_ranks() {
        let mut scratch = MarkScratch::new(1);
        let mut b = BucketMarker::new(&mut scratch);
        b.open(5);
        b.open(5);
    }

    #[test]
    fn tokens_need_opposite_sides() {
        let mut t = TokenMarks::new();
        t.add(3, 0, 1);
        t.add(5, 0, 2);
        t.add(4, 0, 1);
        assert!(t.covered_below(4, 5, 1));
        assert!(t.covered_below(5, 3, 1));
        assert!(!t.covered_below(3, 4, 1));
        assert!(!t.covered_below(4, 5, 0));
        t.remove(5, 0, 2);
        assert!(!t.covered_below(4, 5, 1));
        assert!(!TokenMarks::new().covered_below(0, 1, 10));
    }
}
