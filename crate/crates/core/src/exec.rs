//! Execution policy for data-parallel loops.
//!
//! With the `parallel` feature the [`ExecPolicy::Parallel`] policy maps over
//! rayon's pool; without it every policy runs sequentially. Outputs are
//! identical under both policies because all randomness is index-keyed.

/// How a data-parallel loop is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecPolicy {
    /// Plain iterator on the calling thread.
    Sequential,
    /// Work-stealing pool (falls back to sequential without the `parallel` feature).
    #[default]
    Parallel,
}

impl ExecPolicy {
    /// Maps `f` over `0..len`, preserving order.
    pub fn map_range<U, F>(self, len: usize, f: F) -> Vec<U>
    where
        U: Send,
        F: Fn(usize) -> U + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            ExecPolicy::Parallel if len > 1 => {
                use rayon::prelude::*;
                (0..len).into_par_iter().map(f).collect()
            }
            _ => (0..len).map(f).collect(),
        }
    }

    /// Maps `f` over a slice, preserving order.
    pub fn map_slice<T, U, F>(self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        self.map_range(items.len(), |i| f(&items[i]))
    }
}

/// Caps the global worker pool. Returns `false` if the pool was already built
/// or the `parallel` feature is off.
pub fn configure_threads(threads: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build_global()
            .is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policies_agree() {
        let a = ExecPolicy::Sequential.map_range(100, |i| i * i);
        let b = ExecPolicy::Parallel.map_range(100, |i| i * i);
        assert_eq!(a, b);
    }
}
