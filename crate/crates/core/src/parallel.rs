//! Deterministic chunked execution.
//!
//! Random work is split into fixed-size chunks and chunk `c` always draws
//! from ChaCha stream `c` of the caller's seed. Chunk results are combined in
//! chunk order, so the output is bit-identical whatever the thread count and
//! whether or not the `parallel` feature is enabled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Draws per chunk.
pub const CHUNK_SIZE: usize = 8192;

/// How chunked work is scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Rayon work-stealing over chunks. Falls back to sequential when the
    /// crate is built without the `parallel` feature.
    #[default]
    Parallel,
}

/// RNG for one chunk: the seed selects the key, the chunk index the stream.
pub fn chunk_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Number of chunks needed to cover `n` items.
pub fn chunk_count(n: usize) -> usize {
    n.div_ceil(CHUNK_SIZE)
}

/// Half-open item range of chunk `c`.
pub fn chunk_range(c: usize, n: usize) -> std::ops::Range<usize> {
    let start = c * CHUNK_SIZE;
    start..(start + CHUNK_SIZE).min(n)
}

/// Evaluates `f` on every chunk index and returns the results in chunk order.
pub fn map_chunks<T, F>(chunks: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..chunks).into_par_iter().map(f).collect()
        }
        _ => (0..chunks).map(f).collect(),
    }
}
