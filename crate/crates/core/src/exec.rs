//! Trial dispatch. Results are always returned in trial order, so any
//! executor that honors the contract yields identical aggregates.

use alloc::vec::Vec;

pub trait TrialExecutor: Sync {
    /// Evaluates `f(0), …, f(n-1)` and returns them in index order.
    fn map_trials<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs every trial on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl TrialExecutor for Sequential {
    fn map_trials<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}

/// Pairwise summation with a fixed split pattern.
pub fn pairwise_sum(x: &[f64]) -> f64 {
    const LEAF: usize = 16;
    if x.len() <= LEAF {
        return x.iter().sum();
    }
    let mid = x.len() / 2;
    pairwise_sum(&x[..mid]) + pairwise_sum(&x[mid..])
}
