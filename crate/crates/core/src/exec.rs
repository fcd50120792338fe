//! Data-parallel execution with a sequential fallback.
//!
//! Every batch routine in the crate maps an index range to independent
//! results and then reduces them in index order, so the output is the same
//! bit pattern whichever executor ran the map.

/// Executor for index-parallel batches.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Exec {
    /// Rayon work-stealing pool (falls back to sequential without the `parallel` feature).
    #[default]
    Parallel,
    Sequential,
}

impl Exec {
    /// Maps `f` over `0..n` and collects the results in index order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            _ => (0..n).map(f).collect(),
        }
    }

    /// Whether this executor actually runs on a thread pool in the current build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let a = Exec::Parallel.map(1000, |i| (i as f64).sqrt());
        let b = Exec::Sequential.map(1000, |i| (i as f64).sqrt());
        assert_eq!(a, b);
    }
}
