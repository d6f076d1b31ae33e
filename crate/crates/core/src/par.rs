//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) work is spread over the current rayon
//! pool. Without it, or when a caller asks for [`Execution::Sequential`], the
//! same closures run in a plain loop. Results are always returned in index
//! order, so reductions over them are deterministic either way.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

impl Execution {
    /// Whether this build can actually run work concurrently.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Evaluates `f(0..n)` and collects the results in index order.
pub fn map_indexed<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if exec.is_parallel() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Like [`map_indexed`] but over a slice.
pub fn map_slice<S, T, F>(items: &[S], exec: Execution, f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if exec.is_parallel() {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Configures the global worker pool. `0` leaves the rayon default (one worker
/// per core). Has no effect without the `parallel` feature, or once the global
/// pool has been initialized.
pub fn configure_threads(threads: usize) {
    #[cfg(feature = "parallel")]
    {
        if threads > 0 {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global();
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_keep_index_order() {
        let par = map_indexed(1000, Execution::Parallel, |i| i * i);
        let seq = map_indexed(1000, Execution::Sequential, |i| i * i);
        assert_eq!(par, seq);
        assert_eq!(par[31], 961);
    }

    #[test]
    fn slice_map_matches_iterator() {
        let v: Vec<u32> = (0..257).collect();
        let out = map_slice(&v, Execution::Parallel, |x| x + 1);
        assert_eq!(out, v.iter().map(|x| x + 1).collect::<Vec<_>>());
    }
}
