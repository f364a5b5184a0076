//! Data-parallel map over an index range, with a sequential fallback when
//! the `parallel` feature is disabled.
//!
//! Output order always matches index order, so callers see identical results
//! regardless of feature flags or thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Sequential variant, kept available under all feature combinations so
/// benchmarks can compare both execution paths in one build.
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree() {
        let f = |i: usize| i * i + 1;
        assert_eq!(map_indexed(100, f), map_indexed_seq(100, f));
    }
}
