//! Spanning tree construction, rooting, LCA and tree effective resistance.
//!
//! Rooting computes, in one traversal, the parent/depth arrays, the index of
//! the root-child subtree each node lives in, and the prefix resistance
//! `res_to_root`. After that the effective resistance of any node pair is
//! `res_to_root[u] + res_to_root[v] - 2 * res_to_root[lca]`.

mod kruskal;
pub mod oracle;

pub use kruskal::{build_spanning_tree, SpanningTree, TreeDirection, UnionFind};

use crate::graph::{Edge, NodeId};
use crate::{Error, Result};

/// Subtree index of the root itself.
pub const NO_SUBTREE: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct RootedTree {
    root: NodeId,
    parent: Vec<NodeId>,
    parent_weight: Vec<f64>,
    depth: Vec<u32>,
    subtree: Vec<u32>,
    res_to_root: Vec<f64>,
    child_offsets: Vec<u32>,
    children: Vec<NodeId>,
    /// Nodes in BFS order from the root.
    order: Vec<NodeId>,
    /// Top of the heavy path through each node.
    chain_head: Vec<NodeId>,
}

impl RootedTree {
    /// Roots the spanning tree given by `edges` at `root`.
    ///
    /// Children are kept in ascending id order, so the subtree index of a
    /// root child is its rank among the root's children.
    pub fn from_edges(n: usize, edges: &[Edge], root: NodeId) -> Result<Self> {
        if root as usize >= n {
            return Err(Error::NodeOutOfRange { id: root.into(), n });
        }
        if edges.len() + 1 != n {
            return Err(Error::CorruptTree(format!(
                "{} edges cannot span {n} nodes",
                edges.len()
            )));
        }

        let mut offsets = vec![0u32; n + 1];
        for e in edges {
            if e.u as usize >= n || e.v as usize >= n || e.u == e.v {
                return Err(Error::CorruptTree(format!(
                    "bad tree edge ({}, {})",
                    e.u, e.v
                )));
            }
            offsets[e.u as usize + 1] += 1;
            offsets[e.v as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill: Vec<u32> = offsets[..n].to_vec();
        let mut adjacency = vec![(0 as NodeId, 0.0f64); 2 * edges.len()];
        for e in edges {
            adjacency[fill[e.u as usize] as usize] = (e.v, e.w);
            fill[e.u as usize] += 1;
            adjacency[fill[e.v as usize] as usize] = (e.u, e.w);
            fill[e.v as usize] += 1;
        }

        let mut parent = vec![NodeId::MAX; n];
        let mut parent_weight = vec![0.0; n];
        let mut depth = vec![0u32; n];
        let mut subtree = vec![NO_SUBTREE; n];
        let mut res_to_root = vec![0.0; n];
        let mut order = Vec::with_capacity(n);
        parent[root as usize] = root;
        order.push(root);
        let mut head = 0;
        while head < order.len() {
            let x = order[head];
            head += 1;
            let span = offsets[x as usize] as usize..offsets[x as usize + 1] as usize;
            let nbrs = &mut adjacency[span];
            nbrs.sort_unstable_by_key(|&(y, _)| y);
            for &(y, w) in nbrs.iter() {
                if y == parent[x as usize] && x != root {
                    continue;
                }
                if parent[y as usize] != NodeId::MAX {
                    return Err(Error::CorruptTree(format!("cycle through node {y}")));
                }
                parent[y as usize] = x;
                parent_weight[y as usize] = w;
                depth[y as usize] = depth[x as usize] + 1;
                res_to_root[y as usize] = res_to_root[x as usize] + 1.0 / w;
                order.push(y);
            }
        }
        if order.len() != n {
            return Err(Error::CorruptTree(format!(
                "tree reaches {} of {n} nodes",
                order.len()
            )));
        }

        let mut child_offsets = vec![0u32; n + 1];
        for &x in &order[1..] {
            child_offsets[parent[x as usize] as usize + 1] += 1;
        }
        for i in 0..n {
            child_offsets[i + 1] += child_offsets[i];
        }
        let mut fill: Vec<u32> = child_offsets[..n].to_vec();
        let mut children = vec![0; n.saturating_sub(1)];
        // BFS order visits each parent's children in ascending id order.
        for &x in &order[1..] {
            let p = parent[x as usize] as usize;
            children[fill[p] as usize] = x;
            fill[p] += 1;
        }

        let root_children = &children
            [child_offsets[root as usize] as usize..child_offsets[root as usize + 1] as usize];
        for (index, &c) in root_children.iter().enumerate() {
            subtree[c as usize] = index as u32;
        }
        for &x in &order[1..] {
            if parent[x as usize] != root {
                subtree[x as usize] = subtree[parent[x as usize] as usize];
            }
        }

        // Heavy-path decomposition for O(log n) online LCA.
        let mut size = vec![1u32; n];
        for &x in order[1..].iter().rev() {
            size[parent[x as usize] as usize] += size[x as usize];
        }
        let mut chain_head = vec![root; n];
        for &x in &order {
            let kids = &children
                [child_offsets[x as usize] as usize..child_offsets[x as usize + 1] as usize];
            let heavy = kids
                .iter()
                .copied()
                .max_by_key(|&c| (size[c as usize], std::cmp::Reverse(c)));
            for &c in kids {
                chain_head[c as usize] = if Some(c) == heavy {
                    chain_head[x as usize]
                } else {
                    c
                };
            }
        }

        Ok(Self {
            root,
            parent,
            parent_weight,
            depth,
            subtree,
            res_to_root,
            child_offsets,
            children,
            order,
            chain_head,
        })
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    /// Parent of `v`; the root is its own parent.
    pub fn parent(&self, v: NodeId) -> NodeId {
        self.parent[v as usize]
    }

    /// Weight of the tree edge from `v` to its parent (0 for the root).
    pub fn parent_weight(&self, v: NodeId) -> f64 {
        self.parent_weight[v as usize]
    }

    pub fn depth(&self, v: NodeId) -> u32 {
        self.depth[v as usize]
    }

    pub fn depths(&self) -> &[u32] {
        &self.depth
    }

    /// Index of the root-child subtree containing `v`, or [`NO_SUBTREE`].
    pub fn subtree_id(&self, v: NodeId) -> u32 {
        self.subtree[v as usize]
    }

    /// Number of root-child subtrees.
    pub fn subtree_count(&self) -> usize {
        self.children(self.root).len()
    }

    pub fn res_to_root(&self, v: NodeId) -> f64 {
        self.res_to_root[v as usize]
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        let v = v as usize;
        &self.children[self.child_offsets[v] as usize..self.child_offsets[v + 1] as usize]
    }

    /// Nodes in breadth-first order from the root.
    pub fn bfs_order(&self) -> &[NodeId] {
        &self.order
    }

    /// Tree edges as `(parent, child, w)` in BFS order of the child.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.order[1..]
            .iter()
            .map(|&c| Edge::new(self.parent(c), c, self.parent_weight(c)))
    }

    /// Calls `f` on the tree neighbors of `v` (parent first, then children).
    #[inline]
    pub fn for_each_neighbor(&self, v: NodeId, mut f: impl FnMut(NodeId)) {
        if v != self.root {
            f(self.parent(v));
        }
        for &c in self.children(v) {
            f(c);
        }
    }

    /// LCA by depth lifting: raise the deeper node to the other's depth, then
    /// ascend both until they meet.
    pub fn lca(&self, u: NodeId, v: NodeId) -> NodeId {
        self.lift(u, v).0
    }

    /// Same as [`lca`](Self::lca), also returning the number of single-step
    /// ascents performed.
    pub fn lift(&self, mut u: NodeId, mut v: NodeId) -> (NodeId, usize) {
        let mut steps = 0;
        while self.depth(u) > self.depth(v) {
            u = self.parent(u);
            steps += 1;
        }
        while self.depth(v) > self.depth(u) {
            v = self.parent(v);
            steps += 1;
        }
        while u != v {
            u = self.parent(u);
            v = self.parent(v);
            steps += 2;
        }
        (u, steps)
    }

    /// True when `u` and `v` are known to meet at the root without ascending:
    /// either is the root, or they sit in different root-child subtrees.
    #[inline]
    pub fn meets_at_root(&self, u: NodeId, v: NodeId) -> bool {
        u == self.root || v == self.root || self.subtree(u) != self.subtree(v)
    }

    #[inline]
    fn subtree(&self, v: NodeId) -> u32 {
        self.subtree[v as usize]
    }

    /// LCA with the root shortcut, falling back to depth lifting.
    pub fn lca_fast(&self, u: NodeId, v: NodeId) -> NodeId {
        if self.meets_at_root(u, v) {
            self.root
        } else {
            self.lca(u, v)
        }
    }

    /// LCA with the root shortcut, falling back to heavy-path jumps
    /// (`O(log n)` per query, linear preprocessing).
    pub fn lca_online(&self, mut u: NodeId, mut v: NodeId) -> NodeId {
        if self.meets_at_root(u, v) {
            return self.root;
        }
        loop {
            let (hu, hv) = (self.chain_head[u as usize], self.chain_head[v as usize]);
            if hu == hv {
                return if self.depth(u) <= self.depth(v) { u } else { v };
            }
            if self.depth(hu) > self.depth(hv) {
                u = self.parent(hu);
            } else {
                v = self.parent(hv);
            }
        }
    }

    /// Number of tree edges between `u` and `v`, given their LCA.
    #[inline]
    pub fn hop_distance(&self, u: NodeId, v: NodeId, lca: NodeId) -> u32 {
        self.depth(u) + self.depth(v) - 2 * self.depth(lca)
    }

    /// Effective resistance between `u` and `v` over the tree, given their LCA.
    #[inline]
    pub fn tree_resistance(&self, u: NodeId, v: NodeId, lca: NodeId) -> f64 {
        self.res_to_root(u) + self.res_to_root(v) - 2.0 * self.res_to_root(lca)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::graph::SplitMix64;

    /// Tree part of the six-node fixture, rooted at 0.
    pub(crate) fn t_star_tree() -> RootedTree {
        let pairs = [(0, 1), (0, 2), (1, 3), (1, 4), (2, 5)];
        let edges: Vec<_> = pairs.iter().map(|&(u, v)| Edge::new(u, v, 1.0)).collect();
        RootedTree::from_edges(6, &edges, 0).unwrap()
    }

    /// Random recursive tree with a random relabelling and random weights.
    pub(crate) fn random_tree(n: usize, rng: &mut SplitMix64) -> Vec<Edge> {
        let mut label: Vec<NodeId> = (0..n as NodeId).collect();
        for i in (1..n).rev() {
            label.swap(i, rng.below(i as u64 + 1) as usize);
        }
        (1..n)
            .map(|v| {
                let p = rng.below(v as u64) as usize;
                Edge::new(label[p], label[v], 0.1 + rng.unit() * 4.0)
            })
            .collect()
    }

    #[test]
    fn fixture_arrays() {
        let t = t_star_tree();
        assert_eq!(t.depths(), &[0, 1, 1, 2, 2, 2]);
        assert_eq!(
            (0..6).map(|v| t.subtree_id(v)).collect::<Vec<_>>(),
            vec![NO_SUBTREE, 0, 1, 0, 0, 1]
        );
        assert_eq!(t.subtree_count(), 2);
        assert_eq!(t.parent(0), 0);
        assert_eq!(t.children(1), &[3, 4]);
        assert_eq!(t.res_to_root(5), 2.0);
    }

    #[test]
    fn fixture_lca() {
        let t = t_star_tree();
        assert_eq!(t.lca(3, 5), 0);
        assert_eq!(t.lca(3, 4), 1);
        assert_eq!(t.lca(4, 4), 4);
        let (l, steps) = t.lift(3, 5);
        assert_eq!(l, 0);
        assert!(steps > 0);
        // Different root subtrees: answered without ascending.
        assert!(t.meets_at_root(3, 5));
        assert_eq!(t.lca_fast(3, 5), 0);
        assert!(!t.meets_at_root(3, 4));
        assert_eq!(t.lca_fast(3, 4), 1);
        assert_eq!(t.lca_fast(0, 4), 0);
        assert_eq!(t.lca_online(3, 4), 1);
    }

    #[test]
    fn resistances() {
        let path = [
            Edge::new(0, 1, 2.0),
            Edge::new(1, 3, 4.0),
            Edge::new(3, 2, 1.0),
        ];
        let t = RootedTree::from_edges(4, &path, 0).unwrap();
        assert_eq!(t.tree_resistance(0, 3, t.lca(0, 3)), 0.75);
        let f = t_star_tree();
        assert_eq!(f.tree_resistance(3, 5, 0), 4.0);
        assert_eq!(f.tree_resistance(4, 4, 4), 0.0);
    }

    #[test]
    fn rejects_non_trees() {
        let cyc = [
            Edge::new(0, 1, 1.0),
            Edge::new(1, 2, 1.0),
            Edge::new(2, 0, 1.0),
        ];
        assert!(RootedTree::from_edges(4, &cyc, 0).is_err());
        let short = [Edge::new(0, 1, 1.0)];
        assert!(RootedTree::from_edges(3, &short, 0).is_err());
        assert!(RootedTree::from_edges(2, &short, 2).is_err());
    }

    #[test]
    fn lca_variants_agree_exhaustively_on_small_trees() {
        let mut rng = SplitMix64::new(99);
        for trial in 0..100 {
            let n = 2 + (trial % 59);
            let edges = random_tree(n, &mut rng);
            let root = rng.below(n as u64) as NodeId;
            let t = RootedTree::from_edges(n, &edges, root).unwrap();
            for u in 0..n as NodeId {
                for v in 0..n as NodeId {
                    let l = t.lca(u, v);
                    assert_eq!(t.lca_fast(u, v), l);
                    assert_eq!(t.lca_online(u, v), l);
                }
            }
        }
    }

    #[test]
    fn lca_variants_agree_on_sampled_pairs() {
        let mut rng = SplitMix64::new(5);
        for _ in 0..100 {
            let n = 60 + rng.below(441) as usize;
            let t = RootedTree::from_edges(n, &random_tree(n, &mut rng), 0).unwrap();
            for _ in 0..500 {
                let u = rng.below(n as u64) as NodeId;
                let v = rng.below(n as u64) as NodeId;
                let l = t.lca(u, v);
                assert_eq!(t.lca_fast(u, v), l);
                assert_eq!(t.lca_online(u, v), l);
            }
        }
    }

    #[test]
    fn prefix_resistance_matches_walk() {
        let mut rng = SplitMix64::new(12);
        for _ in 0..20 {
            let n = 2 + rng.below(300) as usize;
            let t = RootedTree::from_edges(n, &random_tree(n, &mut rng), 0).unwrap();
            for v in 0..n as NodeId {
                let mut path = Vec::new();
                let mut x = v;
                while x != t.root() {
                    path.push(t.parent_weight(x));
                    x = t.parent(x);
                }
                let walked = path.iter().rev().fold(0.0, |acc, w| acc + 1.0 / w);
                assert_eq!(walked, t.res_to_root(v));
                assert_eq!(t.depth(v) as usize, path.len());
            }
        }
    }

    #[test]
    fn subtree_ids_are_consistent() {
        let mut rng = SplitMix64::new(1);
        let n = 400;
        let t = RootedTree::from_edges(n, &random_tree(n, &mut rng), 3).unwrap();
        for &v in &t.bfs_order()[1..] {
            let p = t.parent(v);
            if p == t.root() {
                assert_eq!(
                    t.subtree_id(v) as usize,
                    t.children(p).iter().position(|&c| c == v).unwrap()
                );
            } else {
                assert_eq!(t.subtree_id(v), t.subtree_id(p));
            }
            assert_eq!(t.depth(v), t.depth(p) + 1);
        }
    }
}
