//! Replicate fan-out.
//!
//! Replicates are embarrassingly parallel: each derives its streams from its
//! own index, results are collected in index order and reduced sequentially,
//! so parallel and sequential executions produce identical statistics.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map a closure over replicate indices `0..count`, in parallel when the
/// `parallel` feature is active.
pub fn map_replicates<T, F>(count: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(f).collect()
    }
}

/// Sequential reference path, kept unconditionally for the bench suite and
/// for determinism cross-checks against the parallel path.
pub fn map_replicates_seq<T, F>(count: u64, f: F) -> Vec<T>
where
    F: Fn(u64) -> T,
{
    (0..count).map(f).collect()
}

/// Run `body` on a pool of `workers` threads (`None` keeps the global
/// pool). With the sequential fallback the body runs directly and the
/// worker count is irrelevant to both scheduling and output bytes.
pub fn with_worker_pool<R, F>(workers: Option<usize>, body: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        match workers {
            Some(n) if n > 0 => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .expect("worker pool")
                .install(body),
            _ => body(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        body()
    }
}
