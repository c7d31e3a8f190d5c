//! Sequential/parallel dispatch for the data-parallel loops.

use serde::{Deserialize, Serialize};

/// Execution strategy for data-parallel loops.
///
/// `Parallel` uses rayon when the `parallel` feature is enabled and silently
/// degrades to the sequential path otherwise, so results never depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// `f(i)` for `i in 0..len`, collected in index order.
    pub fn map_range<R, F>(self, len: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                (0..len).into_par_iter().map(f).collect()
            }
            _ => (0..len).map(f).collect(),
        }
    }

    /// `f(item)` for every element of `items`, collected in order.
    pub fn map_slice<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
            _ => items.iter().map(f).collect(),
        }
    }

    /// Sum of `f(i)` over `0..len`. The parallel reduction tree differs from the
    /// sequential left fold, so results agree to rounding, not bit-for-bit.
    pub fn sum_range<R, F>(self, len: usize, identity: R, f: F) -> R
    where
        R: Send + Clone + std::ops::Add<Output = R> + Sync,
        F: Fn(usize) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                (0..len)
                    .into_par_iter()
                    .map(f)
                    .reduce(|| identity.clone(), |a, b| a + b)
            }
            _ => (0..len).map(f).fold(identity, |a, b| a + b),
        }
    }
}
