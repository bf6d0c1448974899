//! Data-parallel map with a sequential fallback.
//!
//! Episodes, gain pairs, and oracle seeds are embarrassingly parallel. With
//! the `parallel` feature (default) the map runs on the rayon pool; without
//! it, the sequential path below is used. Both preserve index order, so
//! results are identical regardless of thread count.

/// Map `f` over `0..n`, preserving index order in the output.
#[cfg(feature = "parallel")]
pub fn indexed_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

/// Map `f` over `0..n`, preserving index order in the output.
#[cfg(not(feature = "parallel"))]
pub fn indexed_map<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    indexed_map_seq(n, f)
}

/// Sequential reference path; always available for comparison benchmarks.
pub fn indexed_map_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}
