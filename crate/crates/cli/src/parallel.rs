//! Rayon-backed trial executor.

use corrmimo_core::exec::TrialExecutor;
use rayon::prelude::*;
use rayon::ThreadPool;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "CORRMIMO_THREADS";

pub struct RayonExecutor {
    pool: ThreadPool,
}

impl RayonExecutor {
    /// `threads = 0` lets rayon pick.
    pub fn new(threads: usize) -> Self {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
        Self { pool }
    }

    /// Worker count from `CORRMIMO_THREADS`, falling back to rayon's default.
    pub fn from_env() -> Self {
        let threads = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(0);
        Self::new(threads)
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl TrialExecutor for RayonExecutor {
    fn map_trials<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        // Indexed collect keeps trial order regardless of scheduling.
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use corrmimo_core::exec::Sequential;

    #[test]
    fn matches_sequential_order() {
        let f = |i: usize| (i as f64).sqrt() * 1e-3 + i as f64;
        for threads in [1, 3, 8] {
            assert_eq!(RayonExecutor::new(threads).map_trials(1000, f), Sequential.map_trials(1000, f));
        }
    }
}
