//! Block-parallel merge sort with a deferred final merge.
//!
//! The input is cut into `P` contiguous blocks of `ceil(L / P)` items. Each
//! block is radix-sorted on its own worker, then blocks are merged pairwise
//! level by level until two runs remain; the last merge happens lazily in
//! [`SortCursor`] as the consumer pulls items. With a [`TopKPlan`] every merge
//! keeps only the first `k` items of its output (the rest stays behind as
//! extra runs), so only the top `k` are ever fully merged eagerly.
//!
//! Every entry remembers its input position, and all merges compare
//! `(key, position)`, which is what keeps every path stable. Descending
//! order sorts the bitwise complement of the key.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::{double_to_key, key_to_double, radix_sort_keys, SortItem};
use crate::runtime::{run_tasks, Dispatch, ThreadConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SortOrder {
    #[default]
    Ascending,
    Descending,
}

/// Merge only the first `k` items (in the requested order) eagerly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TopKPlan {
    pub k: usize,
    pub workers: usize,
}

impl TopKPlan {
    pub fn new(k: usize, workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::InvalidConfig("workers must be at least 1".into()));
        }
        Ok(Self { k, workers })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Entry {
    key: u64,
    seq: u32,
    payload: u32,
}

type Run = Vec<Entry>;

/// Sorted runs awaiting their final merge.
#[derive(Debug, Clone)]
pub struct SortedRuns {
    order: SortOrder,
    prefix: Run,
    runs: Vec<Run>,
}

impl SortedRuns {
    pub fn order(&self) -> SortOrder {
        self.order
    }

    pub fn len(&self) -> usize {
        self.prefix.len() + self.runs.iter().map(Vec::len).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of leading items that are already in final order.
    pub fn merged_prefix_len(&self) -> usize {
        self.prefix.len()
    }

    /// Lengths of the runs still to be merged (excluding the merged prefix).
    pub fn run_lengths(&self) -> Vec<usize> {
        self.runs.iter().map(Vec::len).collect()
    }

    pub fn into_cursor(self) -> SortCursor {
        let mut heap = BinaryHeap::with_capacity(self.runs.len());
        for (i, run) in self.runs.iter().enumerate() {
            if let Some(e) = run.first() {
                heap.push(Reverse((e.key, e.seq, i)));
            }
        }
        SortCursor {
            order: self.order,
            prefix: self.prefix.into_iter(),
            pos: vec![0; self.runs.len()],
            runs: self.runs,
            heap,
        }
    }

    /// Drains everything in order.
    pub fn into_vec(self) -> Vec<SortItem> {
        self.into_cursor().collect()
    }
}

/// Single-consumer cursor performing the final multi-way merge lazily.
#[derive(Debug)]
pub struct SortCursor {
    order: SortOrder,
    prefix: std::vec::IntoIter<Entry>,
    runs: Vec<Run>,
    pos: Vec<usize>,
    heap: BinaryHeap<Reverse<(u64, u32, usize)>>,
}

impl SortCursor {
    fn emit(&self, e: Entry) -> SortItem {
        let key = match self.order {
            SortOrder::Ascending => e.key,
            SortOrder::Descending => !e.key,
        };
        SortItem::new(key_to_double(key), e.payload)
    }
}

impl Iterator for SortCursor {
    type Item = SortItem;

    fn next(&mut self) -> Option<SortItem> {
        if let Some(e) = self.prefix.next() {
            return Some(self.emit(e));
        }
        let Reverse((_, _, run)) = self.heap.pop()?;
        let e = self.runs[run][self.pos[run]];
        self.pos[run] += 1;
        if let Some(next) = self.runs[run].get(self.pos[run]) {
            self.heap.push(Reverse((next.key, next.seq, run)));
        }
        Some(self.emit(e))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let rest: usize = self
            .runs
            .iter()
            .zip(&self.pos)
            .map(|(r, &p)| r.len() - p)
            .sum();
        let n = self.prefix.len() + rest;
        (n, Some(n))
    }
}

impl ExactSizeIterator for SortCursor {}

/// Merges `a` and `b`, keeping at most `limit` items; returns the kept items
/// and the unconsumed tails of both inputs.
fn merge_limited(a: &[Entry], b: &[Entry], limit: usize) -> (Run, Run, Run) {
    let take = limit.min(a.len() + b.len());
    let mut out = Vec::with_capacity(take);
    let (mut i, mut j) = (0, 0);
    while out.len() < take {
        if j == b.len() || (i < a.len() && a[i] <= b[j]) {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    (out, a[i..].to_vec(), b[j..].to_vec())
}

struct TopNode {
    head: Run,
    rest: Vec<Run>,
}

/// Sorts `items` on `workers` blocks and merges all but the final level.
pub fn parallel_sort(
    items: &[SortItem],
    workers: usize,
    order: SortOrder,
    plan: Option<TopKPlan>,
) -> Result<SortedRuns> {
    if workers == 0 {
        return Err(Error::InvalidConfig("workers must be at least 1".into()));
    }
    if items.len() >= u32::MAX as usize {
        return Err(Error::InvalidConfig("too many items to sort".into()));
    }
    if let Some(plan) = plan {
        if plan.workers != workers {
            return Err(Error::InvalidConfig(format!(
                "top-k plan is for {} workers, sort has {workers}",
                plan.workers
            )));
        }
        if plan.k > items.len() {
            return Err(Error::InvalidConfig(format!(
                "top-k of {} exceeds {} items",
                plan.k,
                items.len()
            )));
        }
    }
    let config = ThreadConfig::new(workers, Dispatch::Static)?;

    let mut keyed = Vec::with_capacity(items.len());
    for (seq, it) in items.iter().enumerate() {
        let k = double_to_key(it.key)?;
        let k = match order {
            SortOrder::Ascending => k,
            SortOrder::Descending => !k,
        };
        keyed.push((k, (seq as u32, it.payload)));
    }

    let block = items.len().div_ceil(workers).max(1);
    let chunks: Vec<&[(u64, (u32, u32))]> = keyed.chunks(block).collect();
    let blocks: Vec<Run> = run_tasks(&chunks, None, &config, |chunk| {
        let mut pairs = chunk.to_vec();
        radix_sort_keys(&mut pairs);
        pairs
            .into_iter()
            .map(|(key, (seq, payload))| Entry { key, seq, payload })
            .collect()
    })?;
    drop(keyed);

    match plan {
        None => {
            let mut runs = blocks;
            while runs.len() > 2 {
                let pairs: Vec<(&Run, Option<&Run>)> =
                    runs.chunks(2).map(|c| (&c[0], c.get(1))).collect();
                let merged = run_tasks(&pairs, None, &config, |&(a, b)| match b {
                    Some(b) => merge_limited(a, b, usize::MAX).0,
                    None => a.clone(),
                })?;
                runs = merged;
            }
            let prefix = if runs.len() == 1 {
                runs.pop().unwrap()
            } else {
                Vec::new()
            };
            Ok(SortedRuns {
                order,
                prefix,
                runs,
            })
        }
        Some(plan) => {
            let k = plan.k;
            let mut nodes: Vec<TopNode> = blocks
                .into_iter()
                .map(|mut b| {
                    let tail = b.split_off(k.min(b.len()));
                    TopNode {
                        head: b,
                        rest: vec![tail],
                    }
                })
                .collect();
            while nodes.len() > 1 {
                let pairs: Vec<(&TopNode, Option<&TopNode>)> =
                    nodes.chunks(2).map(|c| (&c[0], c.get(1))).collect();
                let heads = run_tasks(&pairs, None, &config, |&(a, b)| match b {
                    Some(b) => merge_limited(&a.head, &b.head, k),
                    None => (a.head.clone(), Vec::new(), Vec::new()),
                })?;
                let mut old = nodes.into_iter();
                let mut next = Vec::with_capacity(heads.len());
                for (head, left_a, left_b) in heads {
                    let mut rest = old.next().map(|a| a.rest).unwrap_or_default();
                    if let Some(b) = old.next() {
                        rest.extend(b.rest);
                    }
                    rest.push(left_a);
                    rest.push(left_b);
                    next.push(TopNode { head, rest });
                }
                nodes = next;
            }
            let TopNode { head, rest } = nodes.pop().unwrap_or(TopNode {
                head: Vec::new(),
                rest: Vec::new(),
            });
            Ok(SortedRuns {
                order,
                prefix: head,
                runs: rest.into_iter().filter(|r| !r.is_empty()).collect(),
            })
        }
    }
}
