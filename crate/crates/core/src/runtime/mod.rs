//! Worker pool, task dispatch and the partitioning that makes marking
//! parallel.
//!
//! Tasks are handed to `P` scoped worker threads. With [`Dispatch::Static`]
//! worker `i` takes tasks `i, i + P, ...`; with [`Dispatch::Greedy`] idle
//! workers pull the largest remaining task (longest-processing-time first).
//! Results always come back in task order, so the dispatch policy never
//! affects output.

mod partition;

pub use partition::{
    build_partitions, partition_key, run_marking_parallel, BucketOutcome, PartitionPlan,
};

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::{Error, Result};

/// Upper bound on the worker count.
pub const MAX_WORKERS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dispatch {
    Static,
    #[default]
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThreadConfig {
    pub workers: usize,
    pub dispatch: Dispatch,
}

impl ThreadConfig {
    pub fn new(workers: usize, dispatch: Dispatch) -> Result<Self> {
        if workers == 0 || workers > MAX_WORKERS {
            return Err(Error::InvalidConfig(format!(
                "worker count must be in 1..={MAX_WORKERS}, got {workers}"
            )));
        }
        Ok(Self { workers, dispatch })
    }

    pub fn sequential() -> Self {
        Self {
            workers: 1,
            dispatch: Dispatch::Greedy,
        }
    }
}

impl Default for ThreadConfig {
    fn default() -> Self {
        Self::sequential()
    }
}

/// Longest-processing-time-first order: indices by cost descending, ties by
/// index.
fn lpt_order(costs: &[usize]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..costs.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(costs[i]), i));
    order
}

/// Simulates greedy dispatch: tasks in LPT order each go to the currently
/// least-loaded worker (lowest id on ties). Returns task indices per worker.
pub fn greedy_dispatch(costs: &[usize], workers: usize) -> Vec<Vec<usize>> {
    let workers = workers.max(1);
    let mut load = vec![0usize; workers];
    let mut assignment = vec![Vec::new(); workers];
    for i in lpt_order(costs) {
        let w = (0..workers).min_by_key(|&w| (load[w], w)).unwrap();
        load[w] += costs[i];
        assignment[w].push(i);
    }
    assignment
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "unknown panic".to_string()
    }
}

/// Runs `f` on every task and returns the results in task order.
///
/// `costs` feeds greedy dispatch; without it every task costs 1. A panic in
/// any worker is reported as [`Error::WorkerPanic`].
pub fn run_tasks<T, R, F>(
    tasks: &[T],
    costs: Option<&[usize]>,
    config: &ThreadConfig,
    f: F,
) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    run_tasks_with(tasks, costs, config, || (), |_, t| f(t))
}

/// [`run_tasks`] with per-worker state: every worker calls `init` once and
/// hands the result to each task it runs.
pub fn run_tasks_with<T, R, S, I, F>(
    tasks: &[T],
    costs: Option<&[usize]>,
    config: &ThreadConfig,
    init: I,
    f: F,
) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    I: Fn() -> S + Sync,
    F: Fn(&mut S, &T) -> R + Sync,
{
    let workers = config.workers.min(tasks.len()).max(1);
    if workers == 1 {
        return std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
            let mut state = init();
            tasks.iter().map(|t| f(&mut state, t)).collect()
        }))
        .map_err(|p| Error::WorkerPanic(panic_message(p)));
    }

    let order: Vec<usize> = match (config.dispatch, costs) {
        (Dispatch::Greedy, Some(c)) => lpt_order(c),
        _ => (0..tasks.len()).collect(),
    };
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..tasks.len()).map(|_| None).collect());

    let outcome = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let (order, next, slots, init, f) = (&order, &next, &slots, &init, &f);
                s.spawn(move || {
                    let mut state = init();
                    let mut done = Vec::new();
                    match config.dispatch {
                        Dispatch::Static => {
                            for i in (w..tasks.len()).step_by(workers) {
                                done.push((i, f(&mut state, &tasks[i])));
                            }
                        }
                        Dispatch::Greedy => loop {
                            let at = next.fetch_add(1, Ordering::Relaxed);
                            let Some(&i) = order.get(at) else { break };
                            done.push((i, f(&mut state, &tasks[i])));
                        },
                    }
                    let mut slots = slots.lock().unwrap_or_else(|e| e.into_inner());
                    for (i, r) in done {
                        slots[i] = Some(r);
                    }
                })
            })
            .collect();
        let mut first_panic = None;
        for h in handles {
            if let Err(p) = h.join() {
                first_panic.get_or_insert(panic_message(p));
            }
        }
        first_panic
    });
    if let Some(msg) = outcome {
        return Err(Error::WorkerPanic(msg));
    }
    Ok(slots
        .into_inner()
        .unwrap_or_else(|e| e.into_inner())
        .into_iter()
        .map(|r| r.expect("every task produces a result"))
        .collect())
}

/// Splits `0..len` into `workers` near-equal contiguous ranges.
pub fn uniform_ranges(len: usize, workers: usize) -> Vec<std::ops::Range<usize>> {
    let chunk = len.div_ceil(workers.max(1)).max(1);
    (0..len)
        .step_by(chunk)
        .map(|start| start..(start + chunk).min(len))
        .collect()
}
