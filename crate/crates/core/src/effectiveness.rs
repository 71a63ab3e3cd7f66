//! Unweighted BFS levels and the per-edge effectiveness scores that drive the
//! spanning-tree choice.
//!
//! [`bfs_parallel`] is level-synchronous: every layer is split among the
//! workers, each worker claims nodes of the next layer with a compare-and-set
//! on the level array and buffers them locally, and the buffers are appended
//! to a shared frontier whose length is an atomic counter. A barrier separates
//! layers. The claim order varies between runs but the levels do not.

use std::sync::atomic::{AtomicU32, AtomicUsize, Ordering};
use std::sync::Barrier;

use crate::graph::{Graph, NodeId};
use crate::{Error, Result};

const UNVISITED: u32 = u32::MAX;
const CLAIM_CHUNK: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BfsLevels {
    pub root: NodeId,
    pub level: Vec<u32>,
}

/// Counters from one parallel BFS run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BfsStats {
    /// Nodes whose adjacency was scanned, summed over all workers.
    pub expansions: usize,
    pub layers: usize,
}

fn check_root(graph: &Graph, root: NodeId) -> Result<()> {
    if root as usize >= graph.node_count() {
        return Err(Error::NodeOutOfRange {
            id: root.into(),
            n: graph.node_count(),
        });
    }
    Ok(())
}

fn finish(graph: &Graph, root: NodeId, level: Vec<u32>) -> Result<BfsLevels> {
    if level.contains(&UNVISITED) {
        return Err(Error::Disconnected {
            components: graph.component_count(),
        });
    }
    Ok(BfsLevels { root, level })
}

pub fn bfs(graph: &Graph, root: NodeId) -> Result<BfsLevels> {
    check_root(graph, root)?;
    let mut level = vec![UNVISITED; graph.node_count()];
    let mut queue = Vec::with_capacity(graph.node_count());
    level[root as usize] = 0;
    queue.push(root);
    let mut head = 0;
    while head < queue.len() {
        let x = queue[head];
        head += 1;
        let next = level[x as usize] + 1;
        for &(y, _) in graph.neighbors(x) {
            if level[y as usize] == UNVISITED {
                level[y as usize] = next;
                queue.push(y);
            }
        }
    }
    finish(graph, root, level)
}

pub fn bfs_parallel(graph: &Graph, root: NodeId, workers: usize) -> Result<BfsLevels> {
    bfs_parallel_with_stats(graph, root, workers).map(|(levels, _)| levels)
}

pub fn bfs_parallel_with_stats(
    graph: &Graph,
    root: NodeId,
    workers: usize,
) -> Result<(BfsLevels, BfsStats)> {
    check_root(graph, root)?;
    if workers == 0 {
        return Err(Error::InvalidConfig("workers must be at least 1".into()));
    }
    let n = graph.node_count();
    let level: Vec<AtomicU32> = (0..n).map(|_| AtomicU32::new(UNVISITED)).collect();
    // Every node enters exactly one frontier, so each buffer needs at most n slots.
    let frontiers: [Vec<AtomicU32>; 2] = [
        (0..n).map(|_| AtomicU32::new(0)).collect(),
        (0..n).map(|_| AtomicU32::new(0)).collect(),
    ];
    let lens = [AtomicUsize::new(1), AtomicUsize::new(0)];
    let cursor = AtomicUsize::new(0);
    let expansions = AtomicUsize::new(0);
    let layers = AtomicUsize::new(0);
    let barrier = Barrier::new(workers);

    level[root as usize].store(0, Ordering::Relaxed);
    frontiers[0][0].store(root, Ordering::Relaxed);

    let work = |_: usize| {
        let mut local: Vec<NodeId> = Vec::new();
        let mut expanded = 0usize;
        let mut depth = 0u32;
        loop {
            let cur = depth as usize & 1;
            let (current, next) = (&frontiers[cur], &frontiers[cur ^ 1]);
            let len = lens[cur].load(Ordering::Acquire);
            if len == 0 {
                break;
            }
            loop {
                let start = cursor.fetch_add(CLAIM_CHUNK, Ordering::Relaxed);
                if start >= len {
                    break;
                }
                for slot in &current[start..(start + CLAIM_CHUNK).min(len)] {
                    let x = slot.load(Ordering::Relaxed);
                    expanded += 1;
                    for &(y, _) in graph.neighbors(x) {
                        let cell = &level[y as usize];
                        if cell.load(Ordering::Relaxed) == UNVISITED
                            && cell
                                .compare_exchange(
                                    UNVISITED,
                                    depth + 1,
                                    Ordering::Relaxed,
                                    Ordering::Relaxed,
                                )
                                .is_ok()
                        {
                            local.push(y);
                        }
                    }
                }
            }
            if !local.is_empty() {
                let base = lens[cur ^ 1].fetch_add(local.len(), Ordering::Relaxed);
                for (slot, &y) in next[base..base + local.len()].iter().zip(&local) {
                    slot.store(y, Ordering::Relaxed);
                }
                local.clear();
            }
            if barrier.wait().is_leader() {
                lens[cur].store(0, Ordering::Relaxed);
                cursor.store(0, Ordering::Relaxed);
                layers.fetch_add(1, Ordering::Relaxed);
            }
            barrier.wait();
            depth += 1;
        }
        expansions.fetch_add(expanded, Ordering::Relaxed);
    };

    if workers == 1 {
        work(0);
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers).map(|i| s.spawn(move || work(i))).collect();
            for h in handles {
                h.join().expect("bfs worker panicked");
            }
        });
    }

    let level = level.into_iter().map(AtomicU32::into_inner).collect();
    let levels = finish(graph, root, level)?;
    Ok((
        levels,
        BfsStats {
            expansions: expansions.into_inner(),
            layers: layers.into_inner(),
        },
    ))
}

/// Positive deterministic score for an edge given its weight and the BFS
/// levels of its endpoints.
pub trait EffectivenessModel: Sync {
    fn score(&self, w: f64, level_u: u32, level_v: u32) -> f64;
}

/// `w * (level_u + level_v + 1)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LevelWeighted;

impl EffectivenessModel for LevelWeighted {
    fn score(&self, w: f64, level_u: u32, level_v: u32) -> f64 {
        w * (f64::from(level_u) + f64::from(level_v) + 1.0)
    }
}

pub fn effectiveness_scores(graph: &Graph, levels: &BfsLevels) -> Vec<f64> {
    effectiveness_scores_with(graph, levels, &LevelWeighted)
}

pub fn effectiveness_scores_with(
    graph: &Graph,
    levels: &BfsLevels,
    model: &dyn EffectivenessModel,
) -> Vec<f64> {
    graph
        .edges()
        .iter()
        .map(|e| model.score(e.w, levels.level[e.u as usize], levels.level[e.v as usize]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_graph, Edge, GenSpec};

    fn t_star() -> Graph {
        let pairs = [
            (0, 1),
            (0, 2),
            (1, 3),
            (1, 4),
            (2, 5),
            (3, 5),
            (4, 5),
            (3, 4),
        ];
        Graph::new(
            6,
            pairs.iter().map(|&(u, v)| Edge::new(u, v, 1.0)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn fixture_levels() {
        let g = t_star();
        assert_eq!(bfs(&g, 0).unwrap().level, vec![0, 1, 1, 2, 2, 2]);
        for p in [1, 4] {
            assert_eq!(
                bfs_parallel(&g, 0, p).unwrap().level,
                vec![0, 1, 1, 2, 2, 2]
            );
        }
    }

    #[test]
    fn trivial_graphs() {
        let single = Graph::new(1, vec![]).unwrap();
        assert_eq!(bfs(&single, 0).unwrap().level, vec![0]);
        assert_eq!(bfs_parallel(&single, 0, 3).unwrap().level, vec![0]);
        let path = Graph::new(3, vec![Edge::new(0, 1, 1.0), Edge::new(1, 2, 1.0)]).unwrap();
        assert_eq!(bfs(&path, 2).unwrap().level, vec![2, 1, 0]);
    }

    #[test]
    fn errors() {
        let g = Graph::new(3, vec![Edge::new(0, 1, 1.0)]).unwrap();
        assert!(matches!(bfs(&g, 0), Err(Error::Disconnected { .. })));
        assert!(matches!(
            bfs_parallel(&g, 0, 2),
            Err(Error::Disconnected { .. })
        ));
        assert!(bfs(&g, 3).is_err());
        assert!(bfs_parallel(&t_star(), 0, 0).is_err());
    }

    #[test]
    fn parallel_matches_sequential_and_expands_once() {
        let g = generate_graph(&GenSpec::new(5000, 20_000, 11)).unwrap();
        let expected = bfs(&g, 17).unwrap();
        for p in [1, 2, 8] {
            let (levels, stats) = bfs_parallel_with_stats(&g, 17, p).unwrap();
            assert_eq!(levels, expected);
            assert_eq!(stats.expansions, g.node_count());
            let max_level = *expected.level.iter().max().unwrap() as usize;
            assert_eq!(stats.layers, max_level + 1);
        }
    }

    #[test]
    fn no_edge_spans_two_levels() {
        let g = generate_graph(&GenSpec::new(800, 3000, 5)).unwrap();
        let levels = bfs_parallel(&g, 0, 4).unwrap();
        for e in g.edges() {
            let (a, b) = (levels.level[e.u as usize], levels.level[e.v as usize]);
            assert!(a.abs_diff(b) <= 1);
        }
    }

    #[test]
    fn scores() {
        let g = t_star();
        let levels = bfs(&g, 0).unwrap();
        let s = effectiveness_scores(&g, &levels);
        assert_eq!(s[2], 4.0); // edge (1,3)
        assert_eq!(s[0], 2.0); // edge (0,1)
        assert!(s.iter().all(|&x| x > 0.0 && x.is_finite()));

        let scaled = Graph::new(
            6,
            g.edges()
                .iter()
                .map(|e| Edge::new(e.u, e.v, e.w * 3.5))
                .collect(),
        )
        .unwrap();
        let s2 = effectiveness_scores(&scaled, &levels);
        for (a, b) in s.iter().zip(&s2) {
            assert_eq!(a * 3.5, *b);
        }
    }
}
