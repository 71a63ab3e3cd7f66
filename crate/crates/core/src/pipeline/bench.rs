use serde::Serialize;

use super::{run_pipeline, PipelineConfig, StageReport};
use crate::graph::{generate_graph, GenSpec};
use crate::{Error, Result};

/// Median stage timings of one `(size, workers)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub m: usize,
    pub workers: usize,
    pub trials: usize,
    pub eff_ms: f64,
    pub mst_ms: f64,
    pub lca_ms: f64,
    pub res_ms: f64,
    pub mark_ms: f64,
    pub sort_ms: f64,
    pub total_ms: f64,
    pub selected: usize,
}

/// Median of a non-empty sample (mean of the middle pair for even sizes).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    }
}

/// Times the pipeline on generated graphs of every size for every worker
/// count. `on_row` sees each row as soon as it is measured.
pub fn bench(
    sizes: &[(usize, usize)],
    trials: usize,
    workers: &[usize],
    seed: u64,
    mut on_row: impl FnMut(&BenchRow),
) -> Result<Vec<BenchRow>> {
    if trials == 0 {
        return Err(Error::InvalidConfig("at least one trial is needed".into()));
    }
    let mut rows = Vec::new();
    for &(n, m) in sizes {
        let graph = generate_graph(&GenSpec::new(n, m, seed))?;
        for &p in workers {
            let config = PipelineConfig::with_workers(p);
            let mut reports: Vec<StageReport> = Vec::with_capacity(trials);
            for _ in 0..trials {
                reports.push(run_pipeline(&graph, &config)?.report);
            }
            let selected = reports[0].selected_count;
            if reports.iter().any(|r| r.selected_count != selected) {
                return Err(Error::InvalidConfig(format!(
                    "selection changed between trials at n={n}, P={p}"
                )));
            }
            let med =
                |f: fn(&StageReport) -> f64| median(&reports.iter().map(f).collect::<Vec<_>>());
            let row = BenchRow {
                n,
                m,
                workers: p,
                trials,
                eff_ms: med(|r| r.eff_ms),
                mst_ms: med(|r| r.mst_ms),
                lca_ms: med(|r| r.lca_ms),
                res_ms: med(|r| r.res_ms),
                mark_ms: med(|r| r.mark_ms),
                sort_ms: med(|r| r.sort_ms),
                total_ms: med(|r| r.total_ms),
                selected,
            };
            on_row(&row);
            rows.push(row);
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(median(&[7.0]), 7.0);
    }

    #[test]
    fn rows_per_size_and_worker_count() {
        let mut seen = 0;
        let rows = bench(&[(200, 800), (400, 1600)], 3, &[1, 2], 5, |_| seen += 1).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(seen, 4);
        assert_eq!(rows[0].selected, rows[1].selected);
        assert!(rows.iter().all(|r| r.total_ms >= r.mark_ms));
        assert!(bench(&[(10, 20)], 0, &[1], 0, |_| ()).is_err());
    }
}
