//! Data-parallel helpers with a sequential fallback.
//!
//! With the default `parallel` feature the helpers fan work out over a rayon
//! pool; without it they degrade to plain iterator loops with identical
//! results. Parallelism is only ever applied across independent work items
//! (problems, pairs, permutation replicates) and results are collected in
//! input order, so output bytes do not depend on the thread count.
//!
//! [`seq_map`] and [`seq_for_each_chunk`] are the sequential implementations
//! and are always compiled; the benches compare them against the parallel
//! versions directly.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Worker-thread bound for one pipeline stage.
///
/// `None` uses the rayon default (or, without the `parallel` feature, runs
/// sequentially). `Some(1)` is sequential by construction.
#[derive(Debug, Clone, Copy, Default)]
pub struct Threads(pub Option<usize>);

impl Threads {
    pub fn from_flag(flag: Option<usize>) -> Threads {
        Threads(flag.or_else(|| {
            std::env::var("COMPPROBE_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        }))
    }
}

/// Sequential map, kept as the reference implementation.
pub fn seq_map<T: Sync, U: Send, F: Fn(&T) -> U + Sync>(items: &[T], f: F) -> Vec<U> {
    items.iter().map(|it| f(it)).collect()
}

/// Map `f` over `items`, preserving order.
#[cfg(feature = "parallel")]
pub fn par_map<T: Sync, U: Send, F: Fn(&T) -> U + Sync + Send>(
    threads: Threads,
    items: &[T],
    f: F,
) -> Vec<U> {
    match threads.0 {
        Some(1) => seq_map(items, f),
        Some(n) => pool(n).install(|| items.par_iter().map(|it| f(it)).collect()),
        None => items.par_iter().map(|it| f(it)).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn par_map<T: Sync, U: Send, F: Fn(&T) -> U + Sync + Send>(
    _threads: Threads,
    items: &[T],
    f: F,
) -> Vec<U> {
    seq_map(items, f)
}

/// Map over `0..n` by index, preserving order.
pub fn par_map_indices<U: Send, F: Fn(usize) -> U + Sync + Send>(
    threads: Threads,
    n: usize,
    f: F,
) -> Vec<U> {
    let idx: Vec<usize> = (0..n).collect();
    par_map(threads, &idx, |&i| f(i))
}

/// Sequential chunk loop, reference implementation for [`par_for_each_chunk`].
pub fn seq_for_each_chunk<T: Send, F: Fn(usize, &mut [T]) + Sync>(
    items: &mut [T],
    chunk: usize,
    f: F,
) {
    for (ci, c) in items.chunks_mut(chunk).enumerate() {
        f(ci * chunk, c);
    }
}

/// Apply `f(offset, chunk)` to disjoint chunks of `items`.
///
/// Each chunk is processed by exactly one worker, so per-element results are
/// identical to the sequential loop.
#[cfg(feature = "parallel")]
pub fn par_for_each_chunk<T: Send, F: Fn(usize, &mut [T]) + Sync + Send>(
    items: &mut [T],
    chunk: usize,
    f: F,
) {
    items
        .par_chunks_mut(chunk)
        .enumerate()
        .for_each(|(ci, c)| f(ci * chunk, c));
}

#[cfg(not(feature = "parallel"))]
pub fn par_for_each_chunk<T: Send, F: Fn(usize, &mut [T]) + Sync + Send>(
    items: &mut [T],
    chunk: usize,
    f: F,
) {
    seq_for_each_chunk(items, chunk, f);
}

#[cfg(feature = "parallel")]
fn pool(n: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .expect("building rayon pool")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn par_map_matches_seq_map() {
        let items: Vec<u64> = (0..1000).collect();
        let f = |x: &u64| x.wrapping_mul(0x9E3779B97F4A7C15).rotate_left(17);
        let seq = seq_map(&items, f);
        for t in [Threads(None), Threads(Some(1)), Threads(Some(3))] {
            assert_eq!(par_map(t, &items, f), seq);
        }
    }

    #[test]
    fn chunked_loop_matches_sequential() {
        let mut a: Vec<u64> = (0..97).collect();
        let mut b = a.clone();
        let f = |off: usize, c: &mut [u64]| {
            for (i, v) in c.iter_mut().enumerate() {
                *v = v.wrapping_add((off + i) as u64);
            }
        };
        seq_for_each_chunk(&mut a, 8, f);
        par_for_each_chunk(&mut b, 8, f);
        assert_eq!(a, b);
    }

    #[test]
    fn threads_env_fallback() {
        std::env::set_var("COMPPROBE_THREADS", "3");
        assert_eq!(Threads::from_flag(None).0, Some(3));
        assert_eq!(Threads::from_flag(Some(2)).0, Some(2));
        std::env::remove_var("COMPPROBE_THREADS");
        assert_eq!(Threads::from_flag(None).0, None);
    }
}
