//! Execution policy shared by the gate kernels and the Monte Carlo drivers.
//!
//! With the `parallel` feature enabled, [`Execution::Parallel`] dispatches to
//! rayon. Without it every policy runs sequentially. Reductions use a fixed
//! chunking so both policies produce bit-identical floating point results.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when work will actually be spread over the rayon pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Evaluates `f(0..n)` and returns the results in index order.
pub fn map_indexed<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

pub(crate) const REDUCE_CHUNK: usize = 1 << 12;

/// Sum of `f(index, item)` with a chunking that does not depend on the
/// thread count.
pub(crate) fn chunked_sum<T, F>(exec: Execution, items: &[T], f: F) -> f64
where
    T: Sync,
    F: Fn(usize, &T) -> f64 + Sync + Send,
{
    let partial = |(ci, chunk): (usize, &[T])| -> f64 {
        let base = ci * REDUCE_CHUNK;
        chunk
            .iter()
            .enumerate()
            .map(|(j, a)| f(base + j, a))
            .sum()
    };
    #[cfg(feature = "parallel")]
    if exec.is_parallel() && items.len() > REDUCE_CHUNK {
        use rayon::prelude::*;
        let parts: Vec<f64> = items
            .par_chunks(REDUCE_CHUNK)
            .enumerate()
            .map(partial)
            .collect();
        return parts.iter().sum();
    }
    let _ = exec;
    let parts: Vec<f64> = items.chunks(REDUCE_CHUNK).enumerate().map(partial).collect();
    parts.iter().sum()
}
