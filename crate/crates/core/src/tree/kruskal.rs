use crate::graph::{EdgeId, Graph, NodeId};
use crate::sortkit::{parallel_sort, SortItem, SortOrder};
use crate::tree::RootedTree;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TreeDirection {
    /// Maximum total score.
    #[default]
    Max,
    /// Minimum total score.
    Min,
}

impl std::str::FromStr for TreeDirection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(Self::Max),
            "min" => Ok(Self::Min),
            other => Err(Error::InvalidConfig(format!(
                "tree direction must be `max` or `min`, got `{other}`"
            ))),
        }
    }
}

/// Disjoint sets with path compression and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, x: u32) -> u32 {
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut x = x;
        while self.parent[x as usize] != root {
            let next = self.parent[x as usize];
            self.parent[x as usize] = root;
            x = next;
        }
        root
    }

    /// Merges the sets of `a` and `b`; false if they were already joined.
    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        true
    }
}

#[derive(Debug, Clone)]
pub struct SpanningTree {
    pub tree: RootedTree,
    /// Tree edge ids in Kruskal acceptance order.
    pub tree_edges: Vec<EdgeId>,
    /// Off-tree edge ids in ascending id order.
    pub off_tree: Vec<EdgeId>,
}

/// Kruskal over the edges stably sorted by `scores` (descending for
/// [`TreeDirection::Max`]), rooted at `root`. Equal scores keep edge-id order.
pub fn build_spanning_tree(
    graph: &Graph,
    scores: &[f64],
    direction: TreeDirection,
    root: NodeId,
    workers: usize,
) -> Result<SpanningTree> {
    if scores.len() != graph.edge_count() {
        return Err(Error::InvalidConfig(format!(
            "{} scores for {} edges",
            scores.len(),
            graph.edge_count()
        )));
    }
    let n = graph.node_count();
    let items: Vec<SortItem> = scores
        .iter()
        .enumerate()
        .map(|(id, &key)| SortItem::new(key, id as u32))
        .collect();
    let order = match direction {
        TreeDirection::Max => SortOrder::Descending,
        TreeDirection::Min => SortOrder::Ascending,
    };
    let sorted = parallel_sort(&items, workers, order, None)?;

    let mut uf = UnionFind::new(n);
    let mut in_tree = vec![false; graph.edge_count()];
    let mut tree_edges = Vec::with_capacity(n.saturating_sub(1));
    // The cursor merges lazily, so stopping at n - 1 edges skips the tail.
    for item in sorted.into_cursor() {
        if tree_edges.len() + 1 >= n {
            break;
        }
        let e = graph.edge(item.payload);
        if uf.union(e.u, e.v) {
            in_tree[item.payload as usize] = true;
            tree_edges.push(item.payload);
        }
    }
    if tree_edges.len() + 1 < n {
        return Err(Error::Disconnected {
            components: n - tree_edges.len(),
        });
    }

    let edges: Vec<_> = tree_edges.iter().map(|&id| *graph.edge(id)).collect();
    let tree = RootedTree::from_edges(n, &edges, root)?;
    let off_tree = (0..graph.edge_count() as EdgeId)
        .filter(|&id| !in_tree[id as usize])
        .collect();
    Ok(SpanningTree {
        tree,
        tree_edges,
        off_tree,
    })
}
