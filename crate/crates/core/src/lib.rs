//! Linear-time graph spectral sparsification.
//!
//! The pipeline scores every edge by BFS-level effectiveness, builds a
//! spanning tree with Kruskal, ranks off-tree edges by their stretch over the
//! tree, and then keeps an off-tree edge only if no previously kept edge is
//! "similar" to it (both endpoints fall inside the coverage balls of the kept
//! edge). Marking costs time linear in the total size of the coverage balls,
//! every other stage is linear in the graph size, and the heavy stages can be
//! spread over a worker pool without changing the output.
//!
//! Module map:
//!
//! - [`graph`]: graph storage, file formats and the seeded random generator.
//! - [`effectiveness`]: sequential and level-synchronous parallel BFS, edge scores.
//! - [`tree`]: Kruskal spanning tree, rooting, LCA, tree effective resistance.
//! - [`sortkit`]: order-preserving float radix sort and the parallel merge sort.
//! - [`marking`]: similarity marking (naive reference, linear and crossing-edge
//!   variants, non-crossing recovery).
//! - [`runtime`]: partition keys, greedy dispatch and the worker pool.
//! - [`pipeline`]: end-to-end sparsification, verification and benchmarking.

pub mod effectiveness;
mod error;
pub mod graph;
pub mod marking;
pub mod pipeline;
pub mod runtime;
pub mod sortkit;
pub mod tree;

pub use error::{Error, Result};
pub use graph::{Edge, EdgeId, Graph, NodeId};
pub use pipeline::{sparsify, PipelineConfig, Sparsifier, StageReport};
pub use runtime::{Dispatch, ThreadConfig};
pub use tree::{RootedTree, TreeDirection};
