#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Execution policy for data-parallel loops.
///
/// Every parallel loop in this crate writes each output element from a pure
/// function of its index, so `Sequential` and `Parallel` produce bit-identical
/// results. Without the `parallel` feature, `Parallel` falls back to the
/// sequential path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// `(0..n).map(f).collect()`, in index order.
    pub fn map_range<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }

    /// Calls `f(index, chunk)` for each `chunk_len`-sized chunk of `data`.
    ///
    /// `init` builds per-worker scratch space; it must not influence results.
    pub fn for_each_chunk_mut<T, S, I, F>(self, data: &mut [T], chunk_len: usize, init: I, f: F)
    where
        T: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, usize, &mut [T]) + Sync + Send,
    {
        assert!(chunk_len > 0);
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => data
                .par_chunks_mut(chunk_len)
                .enumerate()
                .for_each_init(init, |scratch, (i, chunk)| f(scratch, i, chunk)),
            _ => {
                let mut scratch = init();
                for (i, chunk) in data.chunks_mut(chunk_len).enumerate() {
                    f(&mut scratch, i, chunk);
                }
            }
        }
    }
}
