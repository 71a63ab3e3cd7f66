use rustc_hash::FxHashSet;

use super::{pair_key, Edge, Graph, NodeId};
use crate::{Error, Result};

/// SplitMix64 (Steele, Lea and Flood). The generator is spelled out here so
/// generated graphs are reproducible from `(n, m, seed)` alone, independent of
/// any RNG crate version.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform integer in `[0, bound)` by multiply-shift: `(x * bound) >> 64`.
    pub fn below(&mut self, bound: u64) -> u64 {
        ((u128::from(self.next_u64()) * u128::from(bound)) >> 64) as u64
    }

    /// Uniform double in `(0, 1]`: `((x >> 11) + 1) * 2^-53`.
    pub fn unit_open_closed(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform double in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenSpec {
    pub n: usize,
    pub m: usize,
    pub seed: u64,
}

impl GenSpec {
    pub fn new(n: usize, m: usize, seed: u64) -> Self {
        Self { n, m, seed }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidSpec("n must be at least 1".into()));
        }
        if self.m + 1 < self.n {
            return Err(Error::InvalidSpec(format!(
                "m = {} is below n - 1 = {}",
                self.m,
                self.n - 1
            )));
        }
        let max = self.n as u128 * (self.n as u128 - 1) / 2;
        if self.m as u128 > max {
            return Err(Error::InvalidSpec(format!(
                "m = {} exceeds n(n-1)/2 = {max}",
                self.m
            )));
        }
        Ok(())
    }
}

/// Seeded random connected graph.
///
/// All draws come from one [`SplitMix64`] stream seeded with `spec.seed`:
///
/// 1. For `v = 1..n`: parent `p = below(v)`, weight `w = unit_open_closed()`;
///    push edge `(p, v, w)`.
/// 2. Until `m` edges exist: `a = below(n)`, `b = below(n)`; skip when
///    `a == b` or the pair already exists; otherwise draw `w` and push
///    `(min(a, b), max(a, b), w)`.
pub fn generate_graph(spec: &GenSpec) -> Result<Graph> {
    spec.validate()?;
    let n = spec.n;
    let mut rng = SplitMix64::new(spec.seed);
    let mut edges = Vec::with_capacity(spec.m);
    let mut present = FxHashSet::default();
    present.reserve(spec.m);

    for v in 1..n as u64 {
        let p = rng.below(v);
        let w = rng.unit_open_closed();
        present.insert(pair_key(p as NodeId, v as NodeId));
        edges.push(Edge::new(p as NodeId, v as NodeId, w));
    }
    while edges.len() < spec.m {
        let a = rng.below(n as u64) as NodeId;
        let b = rng.below(n as u64) as NodeId;
        if a == b || !present.insert(pair_key(a, b)) {
            continue;
        }
        let w = rng.unit_open_closed();
        edges.push(Edge::new(a.min(b), a.max(b), w));
    }
    Graph::new(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // First outputs for seed 0 from the reference C implementation.
        let mut rng = SplitMix64::new(0);
        assert_eq!(rng.next_u64(), 0xe220_a839_7b1d_cdaf);
        assert_eq!(rng.next_u64(), 0x6e78_9e6a_a1b9_65f4);
        assert_eq!(rng.next_u64(), 0x06c4_5d18_8009_454f);
    }

    #[test]
    fn single_edge() {
        let g = generate_graph(&GenSpec::new(2, 1, 42)).unwrap();
        assert_eq!(g.edge_count(), 1);
        let e = g.edge(0);
        assert_eq!((e.u, e.v), (0, 1));
        assert!(e.w > 0.0 && e.w <= 1.0);
    }

    #[test]
    fn deterministic_and_valid() {
        let spec = GenSpec::new(1000, 4000, 7);
        let a = generate_graph(&spec).unwrap();
        let b = generate_graph(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.edge_count(), 4000);
        assert!(a.is_connected());
        let mut pairs: Vec<_> = a.edges().iter().map(|e| e.ordered()).collect();
        pairs.sort_unstable();
        pairs.dedup();
        assert_eq!(pairs.len(), 4000);
        assert!(a.edges().iter().all(|e| e.w > 0.0 && e.w <= 1.0));
    }

    #[test]
    fn rejects_invalid_specs() {
        assert!(generate_graph(&GenSpec::new(10, 8, 1)).is_err());
        assert!(generate_graph(&GenSpec::new(4, 7, 1)).is_err());
        assert!(generate_graph(&GenSpec::new(0, 0, 1)).is_err());
        assert_eq!(
            generate_graph(&GenSpec::new(4, 6, 1)).unwrap().edge_count(),
            6
        );
    }

    #[test]
    fn unit_ranges() {
        let mut rng = SplitMix64::new(3);
        for _ in 0..10_000 {
            let x = rng.unit_open_closed();
            assert!(x > 0.0 && x <= 1.0);
            let y = rng.unit();
            assert!((0.0..1.0).contains(&y));
            assert!(rng.below(7) < 7);
        }
    }
}
