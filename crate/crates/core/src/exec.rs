//! Order-preserving map over independent work items, on the rayon pool when
//! the `parallel` feature is enabled.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Execution {
    Sequential,
    /// Falls back to sequential when built without the `parallel` feature.
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

pub fn map<T, R, F>(items: &[T], mode: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "DFOLM_THREADS";

/// Configures the global pool from [`THREADS_ENV`]. Returns the thread cap
/// that was applied, if any. Later calls are no-ops.
pub fn init_thread_pool_from_env() -> Option<usize> {
    let threads: usize = std::env::var(THREADS_ENV).ok()?.trim().parse().ok()?;
    if threads == 0 {
        return None;
    }
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    Some(threads)
}
