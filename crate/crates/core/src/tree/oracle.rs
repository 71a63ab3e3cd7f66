//! Dense grounded-Laplacian effective resistance, for cross-checking the
//! prefix-resistance route at desk scale.

use nalgebra::{DMatrix, DVector};

use crate::graph::{Edge, NodeId};
use crate::{Error, Result};

/// Largest node count the dense solve accepts.
pub const ORACLE_MAX_NODES: usize = 2000;

/// Cholesky factor of the weighted Laplacian with node 0 grounded.
pub struct GroundedLaplacian {
    n: usize,
    factor: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

impl GroundedLaplacian {
    pub fn new(n: usize, edges: &[Edge]) -> Result<Self> {
        if n == 0 || n > ORACLE_MAX_NODES {
            return Err(Error::InvalidConfig(format!(
                "dense resistance oracle needs 1..={ORACLE_MAX_NODES} nodes, got {n}"
            )));
        }
        let dim = n - 1;
        let mut lap = DMatrix::<f64>::zeros(dim, dim);
        for e in edges {
            let (u, v) = (e.u as usize, e.v as usize);
            // Row/column i of the grounded matrix is node i + 1.
            if u > 0 {
                lap[(u - 1, u - 1)] += e.w;
            }
            if v > 0 {
                lap[(v - 1, v - 1)] += e.w;
            }
            if u > 0 && v > 0 {
                lap[(u - 1, v - 1)] -= e.w;
                lap[(v - 1, u - 1)] -= e.w;
            }
        }
        let factor = lap
            .cholesky()
            .ok_or_else(|| Error::Singular("grounded Laplacian is not positive definite".into()))?;
        Ok(Self { n, factor })
    }

    /// Solves `L x = e_u - e_v` with `x[0] = 0` and returns `x[u] - x[v]`.
    pub fn resistance(&self, u: NodeId, v: NodeId) -> f64 {
        let (u, v) = (u as usize, v as usize);
        assert!(u < self.n && v < self.n, "node out of range");
        if u == v {
            return 0.0;
        }
        let mut rhs = DVector::<f64>::zeros(self.n - 1);
        if u > 0 {
            rhs[u - 1] += 1.0;
        }
        if v > 0 {
            rhs[v - 1] -= 1.0;
        }
        let x = self.factor.solve(&rhs);
        let at = |i: usize| if i == 0 { 0.0 } else { x[i - 1] };
        at(u) - at(v)
    }
}

/// One-shot effective resistance between `u` and `v`.
pub fn pseudo_inverse_resistance(n: usize, edges: &[Edge], u: NodeId, v: NodeId) -> Result<f64> {
    Ok(GroundedLaplacian::new(n, edges)?.resistance(u, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::SplitMix64;
    use crate::tree::tests::random_tree;
    use crate::tree::RootedTree;

    #[test]
    fn small_cases() {
        let path = [Edge::new(0, 1, 2.0), Edge::new(1, 2, 4.0)];
        let r = pseudo_inverse_resistance(3, &path, 0, 2).unwrap();
        assert!((r - 0.75).abs() < 1e-12);
        let single = [Edge::new(0, 1, 5.0)];
        assert!((pseudo_inverse_resistance(2, &single, 1, 0).unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn disconnected_is_singular() {
        let edges = [Edge::new(0, 1, 1.0)];
        assert!(matches!(
            GroundedLaplacian::new(3, &edges),
            Err(Error::Singular(_))
        ));
        assert!(GroundedLaplacian::new(ORACLE_MAX_NODES + 1, &[]).is_err());
    }

    #[test]
    fn matches_prefix_resistance_on_random_trees() {
        let mut rng = SplitMix64::new(2024);
        for _ in 0..30 {
            let n = 2 + rng.below(120) as usize;
            let edges = random_tree(n, &mut rng);
            let t = RootedTree::from_edges(n, &edges, rng.below(n as u64) as NodeId).unwrap();
            let lap = GroundedLaplacian::new(n, &edges).unwrap();
            for _ in 0..20 {
                let u = rng.below(n as u64) as NodeId;
                let v = rng.below(n as u64) as NodeId;
                let fast = t.tree_resistance(u, v, t.lca(u, v));
                let dense = lap.resistance(u, v);
                assert!(
                    (fast - dense).abs() <= 1e-9 * fast.max(1e-300),
                    "{fast} vs {dense}"
                );
            }
        }
    }
}
