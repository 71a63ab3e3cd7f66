//! End-to-end sparsification with per-stage timing.

mod bench;
mod verify;

pub use bench::{bench, median, BenchRow};
pub use verify::{verify, verify_with_fault, VerifyReport};

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::effectiveness::{bfs_parallel, effectiveness_scores};
use crate::graph::{write_edges, Edge, EdgeId, Format, Graph};
use crate::marking::{mark_offtree, EdgeRecord};
use crate::runtime::{run_tasks, uniform_ranges, Dispatch, ThreadConfig};
use crate::sortkit::{parallel_sort, SortItem, SortOrder, TopKPlan};
use crate::tree::{build_spanning_tree, RootedTree, TreeDirection};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineConfig {
    pub workers: usize,
    pub dispatch: Dispatch,
    pub tree_direction: TreeDirection,
    /// Maximum number of off-tree edges to keep.
    pub budget: Option<usize>,
    pub seed: u64,
    pub report_path: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            workers: 1,
            dispatch: Dispatch::Greedy,
            tree_direction: TreeDirection::Max,
            budget: None,
            seed: 0,
            report_path: None,
        }
    }
}

impl PipelineConfig {
    pub fn with_workers(workers: usize) -> Self {
        Self {
            workers,
            ..Self::default()
        }
    }

    pub fn thread_config(&self) -> Result<ThreadConfig> {
        ThreadConfig::new(self.workers, self.dispatch)
    }
}

/// Stage timings in milliseconds (rounded to microseconds) and counts.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StageReport {
    pub eff_ms: f64,
    pub mst_ms: f64,
    pub lca_ms: f64,
    pub res_ms: f64,
    pub mark_ms: f64,
    pub sort_ms: f64,
    pub total_ms: f64,
    pub n: usize,
    pub l: usize,
    #[serde(rename = "selected")]
    pub selected_count: usize,
}

impl StageReport {
    /// One-line JSON object; times with three decimals.
    pub fn to_json(&self) -> String {
        format!(
            "{{\"eff_ms\":{:.3},\"mst_ms\":{:.3},\"lca_ms\":{:.3},\"res_ms\":{:.3},\"mark_ms\":{:.3},\"sort_ms\":{:.3},\"total_ms\":{:.3},\"n\":{},\"l\":{},\"selected\":{}}}",
            self.eff_ms,
            self.mst_ms,
            self.lca_ms,
            self.res_ms,
            self.mark_ms,
            self.sort_ms,
            self.total_ms,
            self.n,
            self.l,
            self.selected_count
        )
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}

fn ms_since(start: Instant) -> f64 {
    (start.elapsed().as_nanos() as f64 / 1e3).round() / 1e3
}

/// Spanning tree plus the selected off-tree edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Sparsifier {
    pub n: usize,
    /// Tree edges, normalised to `u < v`, ascending by `(u, v)`.
    pub tree_edges: Vec<Edge>,
    /// Selected off-tree edges, normalised and sorted the same way.
    pub selected: Vec<Edge>,
    /// Input ids of the selected off-tree edges, in selection order.
    pub selected_ids: Vec<EdgeId>,
}

fn normalised(mut edges: Vec<Edge>) -> Vec<Edge> {
    for e in edges.iter_mut() {
        if e.u > e.v {
            std::mem::swap(&mut e.u, &mut e.v);
        }
    }
    edges.sort_by_key(|e| (e.u, e.v));
    edges
}

impl Sparsifier {
    pub fn edge_count(&self) -> usize {
        self.tree_edges.len() + self.selected.len()
    }

    /// Tree edges followed by selected edges.
    pub fn edges(&self) -> Vec<Edge> {
        self.tree_edges
            .iter()
            .chain(&self.selected)
            .copied()
            .collect()
    }

    pub fn to_graph(&self) -> Result<Graph> {
        Graph::new(self.n, self.edges())
    }

    pub fn write<W: Write>(&self, out: &mut W, format: Format) -> Result<()> {
        write_edges(out, self.n, &self.edges(), format)
    }

    pub fn save(&self, path: impl AsRef<Path>, format: Format) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write(&mut out, format)?;
        out.flush()?;
        Ok(())
    }
}

/// Everything one pipeline run produced, for inspection and verification.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub tree: RootedTree,
    pub tree_edge_ids: Vec<EdgeId>,
    /// Off-tree records in selection order, flags set; with a budget only
    /// the prefix that was needed to reach it.
    pub records: Vec<EdgeRecord>,
    /// Input ids of the kept off-tree edges, in selection order.
    pub selected_ids: Vec<EdgeId>,
    pub report: StageReport,
}

/// Smallest prefix tried first when a budget is set.
const MIN_BUDGET_PREFIX: usize = 64;

/// Runs every stage and keeps the intermediate state.
pub fn run_pipeline(graph: &Graph, config: &PipelineConfig) -> Result<PipelineRun> {
    let threads = config.thread_config()?;
    let workers = threads.workers;
    let n = graph.node_count();
    if n == 0 {
        return Err(Error::InvalidConfig("graph has no nodes".into()));
    }
    let total = Instant::now();
    let mut report = StageReport {
        n,
        l: graph.edge_count(),
        ..StageReport::default()
    };

    let t = Instant::now();
    let root = graph.max_degree_node().unwrap_or(0);
    let levels = bfs_parallel(graph, root, workers)?;
    let scores = effectiveness_scores(graph, &levels);
    report.eff_ms = ms_since(t);

    let t = Instant::now();
    let st = build_spanning_tree(graph, &scores, config.tree_direction, root, workers)?;
    report.mst_ms = ms_since(t);
    let tree = st.tree;
    let off = st.off_tree;

    let t = Instant::now();
    let ranges = uniform_ranges(off.len(), workers);
    let lcas: Vec<_> = run_tasks(&ranges, None, &threads, |range| {
        off[range.clone()]
            .iter()
            .map(|&id| {
                let e = graph.edge(id);
                tree.lca_online(e.u, e.v)
            })
            .collect::<Vec<_>>()
    })?
    .concat();
    report.lca_ms = ms_since(t);

    let t = Instant::now();
    let records: Vec<EdgeRecord> = run_tasks(&ranges, None, &threads, |range| {
        range
            .clone()
            .map(|i| EdgeRecord::with_lca(off[i], graph.edge(off[i]), &tree, lcas[i]))
            .collect::<Vec<_>>()
    })?
    .concat();
    report.res_ms = ms_since(t);

    let t = Instant::now();
    let items: Vec<SortItem> = records
        .iter()
        .enumerate()
        .map(|(i, r)| SortItem::new(r.resistance_score, i as u32))
        .collect();
    let mut prefix = match config.budget {
        Some(b) => (2 * b).max(MIN_BUDGET_PREFIX).min(items.len()),
        None => items.len(),
    };
    let plan = config
        .budget
        .map(|_| TopKPlan::new(prefix, workers))
        .transpose()?;
    let mut cursor = parallel_sort(&items, workers, SortOrder::Descending, plan)?.into_cursor();
    let mut ordered: Vec<EdgeRecord> = cursor
        .by_ref()
        .take(prefix)
        .map(|it| records[it.payload as usize])
        .collect();
    report.sort_ms = ms_since(t);

    loop {
        let t = Instant::now();
        mark_offtree(&tree, &mut ordered, &threads)?;
        report.mark_ms += ms_since(t);
        let kept = ordered.iter().filter(|r| r.is_selected).count();
        let done = match config.budget {
            Some(b) => kept >= b || prefix == items.len(),
            None => true,
        };
        if done {
            break;
        }
        // Marks of a prefix never depend on later edges, so a longer prefix
        // only extends the selection.
        let t_sort = Instant::now();
        let more = prefix.min(items.len() - prefix);
        ordered.extend(
            cursor
                .by_ref()
                .take(more)
                .map(|it| records[it.payload as usize]),
        );
        prefix += more;
        report.sort_ms += ms_since(t_sort);
    }
    let limit = config.budget.unwrap_or(usize::MAX);
    let selected_ids: Vec<EdgeId> = ordered
        .iter()
        .filter(|r| r.is_selected)
        .take(limit)
        .map(|r| r.id)
        .collect();
    report.selected_count = selected_ids.len();
    report.total_ms = ms_since(total);

    Ok(PipelineRun {
        tree,
        tree_edge_ids: st.tree_edges,
        records: ordered,
        selected_ids,
        report,
    })
}

/// Sparsifies `graph`; the output does not depend on the worker count.
pub fn sparsify(graph: &Graph, config: &PipelineConfig) -> Result<(Sparsifier, StageReport)> {
    let run = run_pipeline(graph, config)?;
    let sparsifier = Sparsifier {
        n: graph.node_count(),
        tree_edges: normalised(
            run.tree_edge_ids
                .iter()
                .map(|&id| *graph.edge(id))
                .collect(),
        ),
        selected: normalised(run.selected_ids.iter().map(|&id| *graph.edge(id)).collect()),
        selected_ids: run.selected_ids,
    };
    if let Some(path) = &config.report_path {
        run.report.write_json(path)?;
    }
    Ok((sparsifier, run.report))
}

/// Sparsifies with the spanning tree fixed to `tree`; off-tree edges are all
/// graph edges that are not tree edges. Useful when the tree is given.
pub fn sparsify_on_tree(
    graph: &Graph,
    tree: &RootedTree,
    config: &PipelineConfig,
) -> Result<Sparsifier> {
    let threads = config.thread_config()?;
    let tree_pairs: std::collections::HashSet<(u32, u32)> =
        tree.edges().map(|e| e.ordered()).collect();
    let mut tree_edges = Vec::new();
    let mut records = Vec::new();
    for (id, e) in graph.edges().iter().enumerate() {
        if tree_pairs.contains(&e.ordered()) {
            tree_edges.push(*e);
        } else {
            records.push(EdgeRecord::new(id as EdgeId, e, tree));
        }
    }
    if tree_edges.len() + 1 != graph.node_count() {
        return Err(Error::CorruptTree(
            "tree is not a spanning tree of the graph".into(),
        ));
    }
    let order = crate::marking::resistance_order(&records, threads.workers, None)?;
    let mut ordered: Vec<EdgeRecord> = order.iter().map(|&i| records[i as usize]).collect();
    mark_offtree(tree, &mut ordered, &threads)?;
    let selected_ids: Vec<EdgeId> = ordered
        .iter()
        .filter(|r| r.is_selected)
        .take(config.budget.unwrap_or(usize::MAX))
        .map(|r| r.id)
        .collect();
    Ok(Sparsifier {
        n: graph.node_count(),
        tree_edges: normalised(tree_edges),
        selected: normalised(selected_ids.iter().map(|&id| *graph.edge(id)).collect()),
        selected_ids,
    })
}
