//! Data-parallel helpers with a sequential fallback.
//!
//! Every helper produces results in index order, so output is bitwise
//! identical for any thread count (and for the sequential build).

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `0..n` into a vector, element `i` computed by `f(i)`.
#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<T, F: Fn(usize) -> T>(n: usize, f: F) -> Vec<T> {
    (0..n).map(f).collect()
}

/// Run `f(i)` for every `i` in `0..n`, for side effects behind `&` captures.
/// Callers must guarantee that distinct `i` touch disjoint data.
#[cfg(feature = "parallel")]
pub(crate) fn for_each_indexed<F: Fn(usize) + Sync + Send>(n: usize, f: F) {
    (0..n).into_par_iter().for_each(f);
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn for_each_indexed<F: Fn(usize)>(n: usize, f: F) {
    (0..n).for_each(f);
}
