//! Counter-addressed random streams and the chunked parallel runner.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::SimConfig;
use crate::error::{Error, Result};

/// Samples per chunk.
pub const CHUNK: u64 = 1 << 14;

/// Words reserved per chunk inside a stream.
const CHUNK_WORDS_LOG2: u32 = 40;

/// Generator for chunk `chunk` of stream `stream`; independent of how chunks
/// are scheduled.
pub fn chunk_rng(seed: u64, stream: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(u128::from(chunk) << CHUNK_WORDS_LOG2);
    rng
}

pub(crate) fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Invalid(format!("cannot start {workers} workers: {e}")))
}

/// Runs `f(rng, count)` on every chunk of `sim.samples` and returns the
/// results in chunk order.
pub(crate) fn run_chunks<A, F>(sim: &SimConfig, stream: u64, f: F) -> Result<Vec<A>>
where
    A: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> A + Sync,
{
    sim.validate()?;
    let chunks = sim.samples.div_ceil(CHUNK);
    let work = |c: u64| {
        let mut rng = chunk_rng(sim.seed, stream, c);
        f(&mut rng, CHUNK.min(sim.samples - c * CHUNK))
    };
    if sim.workers == 1 {
        return Ok((0..chunks).map(work).collect());
    }
    Ok(pool(sim.workers)?.install(|| (0..chunks).into_par_iter().map(work).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn chunks_are_addressable() {
        let a: Vec<u64> = (0..4).map(|_| chunk_rng(7, 1, 3).random()).collect();
        let mut r = chunk_rng(7, 1, 3);
        assert_eq!(a[0], r.random::<u64>());
        assert_ne!(chunk_rng(7, 1, 3).random::<u64>(), chunk_rng(7, 1, 4).random::<u64>());
        assert_ne!(chunk_rng(7, 1, 3).random::<u64>(), chunk_rng(7, 2, 3).random::<u64>());
        assert_ne!(chunk_rng(7, 1, 3).random::<u64>(), chunk_rng(8, 1, 3).random::<u64>());
    }

    #[test]
    fn runner_is_worker_independent() {
        let f = |rng: &mut ChaCha8Rng, n: u64| (0..n).map(|_| rng.random::<f64>()).sum::<f64>();
        let one = run_chunks(&SimConfig::new(3, 100_000, 1).unwrap(), 0, f).unwrap();
        let four = run_chunks(&SimConfig::new(3, 100_000, 4).unwrap(), 0, f).unwrap();
        assert_eq!(one, four);
        assert_eq!(one.len(), 100_000usize.div_ceil(CHUNK as usize));
    }
}
