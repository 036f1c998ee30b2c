//! Thin facade over rayon so every element loop has a sequential fallback.
//!
//! With the `parallel` feature (default) these helpers dispatch to rayon;
//! without it they degrade to plain iterators. Floating-point reductions are
//! tree-shaped under rayon, so bitwise reproducibility across thread counts
//! is not promised anywhere in the library.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `(0..n).map(f)` collected into a `Vec`.
#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<U: Send>(n: usize, f: impl Fn(usize) -> U + Sync + Send) -> Vec<U> {
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<U>(n: usize, f: impl Fn(usize) -> U) -> Vec<U> {
    (0..n).map(f).collect()
}

/// Sum of `f(i)` over `0..n`.
#[cfg(feature = "parallel")]
pub(crate) fn sum_indexed(n: usize, f: impl Fn(usize) -> f64 + Sync + Send) -> f64 {
    (0..n).into_par_iter().map(f).sum()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn sum_indexed(n: usize, f: impl Fn(usize) -> f64) -> f64 {
    (0..n).map(f).sum()
}

/// In-place update of disjoint row chunks, used by the sparse matvec.
#[cfg(feature = "parallel")]
pub(crate) fn for_each_chunk_mut<T: Send>(
    data: &mut [T],
    chunk: usize,
    f: impl Fn(usize, &mut [T]) + Sync + Send,
) {
    data.par_chunks_mut(chunk)
        .enumerate()
        .for_each(|(ci, slice)| f(ci * chunk, slice));
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn for_each_chunk_mut<T>(data: &mut [T], chunk: usize, f: impl Fn(usize, &mut [T])) {
    for (ci, slice) in data.chunks_mut(chunk).enumerate() {
        f(ci * chunk, slice);
    }
}

/// Unstable sort, parallel when available.
#[cfg(feature = "parallel")]
pub(crate) fn sort_unstable_by_key<T: Send, K: Ord + Send>(
    data: &mut Vec<T>,
    key: impl Fn(&T) -> K + Sync + Send,
) {
    data.par_sort_unstable_by_key(key);
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn sort_unstable_by_key<T, K: Ord>(data: &mut Vec<T>, key: impl Fn(&T) -> K) {
    data.sort_unstable_by_key(key);
}

/// Parallel triplet collection: each index appends matrix triplets and
/// right-hand-side corrections into thread-local buffers that are
/// concatenated at the end.
#[cfg(feature = "parallel")]
pub(crate) fn collect_entries<F>(n: usize, f: F) -> (Vec<(u32, u32, f64)>, Vec<(u32, f64)>)
where
    F: Fn(usize, &mut Vec<(u32, u32, f64)>, &mut Vec<(u32, f64)>) + Sync + Send,
{
    use rayon::prelude::*;
    (0..n)
        .into_par_iter()
        .fold(
            || (Vec::new(), Vec::new()),
            |(mut trip, mut rhs), i| {
                f(i, &mut trip, &mut rhs);
                (trip, rhs)
            },
        )
        .reduce(
            || (Vec::new(), Vec::new()),
            |(mut t1, mut r1), (mut t2, mut r2)| {
                t1.append(&mut t2);
                r1.append(&mut r2);
                (t1, r1)
            },
        )
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn collect_entries<F>(n: usize, f: F) -> (Vec<(u32, u32, f64)>, Vec<(u32, f64)>)
where
    F: Fn(usize, &mut Vec<(u32, u32, f64)>, &mut Vec<(u32, f64)>),
{
    let mut trip = Vec::new();
    let mut rhs = Vec::new();
    for i in 0..n {
        f(i, &mut trip, &mut rhs);
    }
    (trip, rhs)
}
