//! Execution strategy for data-parallel loops.
//!
//! `Parallel` is only honored when the crate is built with the `parallel`
//! feature; otherwise it falls back to the sequential path. Every parallel
//! path here is either elementwise or index-ordered, so results do not
//! depend on the strategy or the thread count.

use num_complex::Complex64;

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
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

#[cfg(feature = "parallel")]
const CHUNK: usize = 1024;

/// Applies `f(j, &mut psi[j])` to every element.
pub(crate) fn for_each_indexed<F>(exec: Exec, psi: &mut [Complex64], f: F)
where
    F: Fn(usize, &mut Complex64) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() && psi.len() > CHUNK {
        use rayon::prelude::*;
        psi.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
            let base = c * CHUNK;
            for (i, z) in chunk.iter_mut().enumerate() {
                f(base + i, z);
            }
        });
        return;
    }
    let _ = exec;
    psi.iter_mut().enumerate().for_each(|(j, z)| f(j, z));
}

/// Maps `f` over `items`, keeping input order in the output.
pub fn map_ordered<T, R, F>(exec: Exec, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Runs `f` on a dedicated pool of `threads` workers when parallel execution
/// is available; otherwise just calls `f`.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    if let Some(k) = threads.filter(|&k| k > 0) {
        match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => return pool.install(f),
            Err(e) => log::warn!("could not build a {k}-thread pool: {e}"),
        }
    }
    let _ = threads;
    f()
}
