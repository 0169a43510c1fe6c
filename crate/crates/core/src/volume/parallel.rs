//! Worker pool for per-cell volume evaluation.
//!
//! The pool size comes from `LINF_FIXPOINT_THREADS` (read once); unset or
//! unparsable values fall back to rayon's default. Results are always reduced
//! in input order, so sums are identical whatever the thread count.

use std::sync::OnceLock;

use rayon::prelude::*;

pub const THREADS_ENV: &str = "LINF_FIXPOINT_THREADS";

/// Below this many items the work is done inline.
const PARALLEL_THRESHOLD: usize = 16;

fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut builder = rayon::ThreadPoolBuilder::new().thread_name(|i| format!("volume-{i}"));
        if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
            builder = builder.num_threads(n.max(1));
        }
        builder.build().expect("failed to build volume worker pool")
    })
}

pub fn worker_count() -> usize {
    pool().current_num_threads()
}

pub(crate) fn map_cells<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    if items.len() < PARALLEL_THRESHOLD || worker_count() == 1 {
        return items.into_iter().map(f).collect();
    }
    pool().install(|| items.into_par_iter().map(f).collect())
}

pub(crate) fn map_refs<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    if items.len() < PARALLEL_THRESHOLD || worker_count() == 1 {
        return items.iter().map(f).collect();
    }
    pool().install(|| items.par_iter().map(f).collect())
}
