//! Immutable weighted undirected graphs.
//!
//! Node ids are dense and 0-based. Each undirected edge is stored once in the
//! edge list and appears in the adjacency of both endpoints. Weights are
//! conductances: larger means a stronger edge, and the resistance of an edge
//! is `1 / w`.

mod generate;
mod io;

pub use generate::{generate_graph, GenSpec, SplitMix64};
pub use io::{load_graph, parse_graph, save_graph, write_edges, write_graph, Format};

use rustc_hash::FxHashSet;

use crate::{Error, Result};

pub type NodeId = u32;
pub type EdgeId = u32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub w: f64,
}

impl Edge {
    pub fn new(u: NodeId, v: NodeId, w: f64) -> Self {
        Self { u, v, w }
    }

    /// Endpoints ordered as `(min, max)`.
    pub fn ordered(&self) -> (NodeId, NodeId) {
        if self.u <= self.v {
            (self.u, self.v)
        } else {
            (self.v, self.u)
        }
    }
}

pub(crate) fn pair_key(u: NodeId, v: NodeId) -> u64 {
    let (a, b) = if u <= v { (u, v) } else { (v, u) };
    (u64::from(a) << 32) | u64::from(b)
}

#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    offsets: Vec<usize>,
    adjacency: Vec<(NodeId, EdgeId)>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.edges == other.edges
    }
}

impl Graph {
    /// Validates the edge list and builds the adjacency.
    ///
    /// Rejects out-of-range ids, self-loops, weights that are not positive and
    /// finite, and duplicate endpoint pairs in either orientation.
    /// Connectivity is not required here; see [`Graph::ensure_connected`].
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        if edges.len() >= u32::MAX as usize || n >= u32::MAX as usize {
            return Err(Error::InvalidConfig(
                "graph too large for 32-bit ids".into(),
            ));
        }
        let mut seen = FxHashSet::default();
        seen.reserve(edges.len());
        for e in &edges {
            for id in [e.u, e.v] {
                if id as usize >= n {
                    return Err(Error::NodeOutOfRange { id: id.into(), n });
                }
            }
            if e.u == e.v {
                return Err(Error::SelfLoop(e.u));
            }
            if !(e.w > 0.0 && e.w.is_finite()) {
                return Err(Error::InvalidWeight {
                    u: e.u,
                    v: e.v,
                    w: e.w,
                });
            }
            if !seen.insert(pair_key(e.u, e.v)) {
                return Err(Error::DuplicateEdge(e.u, e.v));
            }
        }

        let mut offsets = vec![0usize; n + 1];
        for e in &edges {
            offsets[e.u as usize + 1] += 1;
            offsets[e.v as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut adjacency = vec![(0, 0); 2 * edges.len()];
        for (id, e) in edges.iter().enumerate() {
            adjacency[fill[e.u as usize]] = (e.v, id as EdgeId);
            fill[e.u as usize] += 1;
            adjacency[fill[e.v as usize]] = (e.u, id as EdgeId);
            fill[e.v as usize] += 1;
        }

        Ok(Self {
            n,
            edges,
            offsets,
            adjacency,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id as usize]
    }

    /// Neighbors of `v` paired with the connecting edge id, in edge-id order.
    pub fn neighbors(&self, v: NodeId) -> &[(NodeId, EdgeId)] {
        let v = v as usize;
        &self.adjacency[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Highest-degree node, lowest id on ties. `None` for the empty graph.
    pub fn max_degree_node(&self) -> Option<NodeId> {
        (0..self.n as NodeId).max_by_key(|&v| (self.degree(v), std::cmp::Reverse(v)))
    }

    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.n];
        let mut stack = Vec::new();
        let mut components = 0;
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            stack.push(start as NodeId);
            while let Some(x) = stack.pop() {
                for &(y, _) in self.neighbors(x) {
                    if !seen[y as usize] {
                        seen[y as usize] = true;
                        stack.push(y);
                    }
                }
            }
        }
        components
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() <= 1
    }

    pub fn ensure_connected(&self) -> Result<()> {
        match self.component_count() {
            0 | 1 => Ok(()),
            components => Err(Error::Disconnected { components }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::new(
            3,
            vec![
                Edge::new(0, 1, 3.0),
                Edge::new(1, 2, 2.0),
                Edge::new(0, 2, 1.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn adjacency_lists_both_endpoints() {
        let g = triangle();
        assert_eq!(g.neighbors(0), &[(1, 0), (2, 2)]);
        assert_eq!(g.neighbors(1), &[(0, 0), (2, 1)]);
        let degree_sum: usize = (0..3).map(|v| g.degree(v)).sum();
        assert_eq!(degree_sum, 2 * g.edge_count());
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(matches!(
            Graph::new(2, vec![Edge::new(0, 0, 1.0)]),
            Err(Error::SelfLoop(0))
        ));
        assert!(matches!(
            Graph::new(2, vec![Edge::new(0, 2, 1.0)]),
            Err(Error::NodeOutOfRange { id: 2, n: 2 })
        ));
        for w in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(
                Graph::new(2, vec![Edge::new(0, 1, w)]),
                Err(Error::InvalidWeight { .. })
            ));
        }
        assert!(matches!(
            Graph::new(2, vec![Edge::new(0, 1, 1.0), Edge::new(1, 0, 2.0)]),
            Err(Error::DuplicateEdge(1, 0))
        ));
    }

    #[test]
    fn connectivity() {
        assert!(triangle().is_connected());
        let g = Graph::new(4, vec![Edge::new(0, 1, 1.0), Edge::new(2, 3, 1.0)]).unwrap();
        assert_eq!(g.component_count(), 2);
        assert!(matches!(
            g.ensure_connected(),
            Err(Error::Disconnected { components: 2 })
        ));
    }

    #[test]
    fn max_degree_prefers_lowest_id() {
        let g = triangle();
        assert_eq!(g.max_degree_node(), Some(0));
        let star = Graph::new(4, vec![Edge::new(3, 0, 1.0), Edge::new(3, 1, 1.0)]).unwrap();
        assert_eq!(star.max_degree_node(), Some(3));
    }
}
