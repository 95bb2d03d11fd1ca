//! Data-parallel helpers.
//!
//! Work items write disjoint output slots and every random draw is counter
//! keyed, so outputs are identical whether a loop runs on one thread or
//! many. With the `parallel` feature disabled, every helper degrades to the
//! sequential loop with the same semantics.

/// Maps `f` over `0..n`, preserving index order in the output.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if rayon::current_num_threads() > 1 && n > 1 {
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    (0..n).map(f).collect()
}

/// Runs `f` inside a rayon pool of `threads` workers (0 = library default).
/// Sequential builds ignore the thread count.
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if threads > 0 {
            builder = builder.num_threads(threads);
        }
        match builder.build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        f()
    }
}

/// Worker cap requested through `GIBBS_OT_THREADS` (0 or unset = auto).
pub fn threads_from_env() -> usize {
    std::env::var("GIBBS_OT_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0)
}

/// Caps the global worker pool at `threads` (0 = library default). Call once
/// at process start; later calls are ignored. No-op in sequential builds.
pub fn init_global_pool(threads: usize) {
    #[cfg(feature = "parallel")]
    if threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
}
