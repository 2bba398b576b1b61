//! Order-preserving data-parallel map; sequential when the `parallel` feature is off.

#[cfg(feature = "parallel")]
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// `f(0), ..., f(n - 1)`.
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    let indices: Vec<usize> = (0..n).collect();
    map(&indices, |&i| f(i))
}

/// Whether this build runs maps on the rayon pool.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
