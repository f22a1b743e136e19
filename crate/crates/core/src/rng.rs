//! Seeded random streams for Monte-Carlo batches.
//!
//! A batch of `count` draws is cut into fixed-size blocks; block `b` always
//! uses ChaCha8 stream `b` of the given seed. Output is therefore identical
//! for any number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type StreamRng = ChaCha8Rng;

pub const BLOCK_SIZE: usize = 4096;

pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `count` draws of `draw`, generated in parallel blocks, in a fixed order.
pub fn par_generate<T, F>(seed: u64, count: usize, draw: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut StreamRng) -> T + Sync,
{
    let blocks = count.div_ceil(BLOCK_SIZE);
    let chunks: Vec<Vec<T>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, b as u64);
            let len = BLOCK_SIZE.min(count - b * BLOCK_SIZE);
            (0..len).map(|_| draw(&mut rng)).collect()
        })
        .collect();
    chunks.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn independent_of_thread_count() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| par_generate(42, 3 * BLOCK_SIZE + 17, |r| r.random::<u64>()))
        };
        let a = run(1);
        assert_eq!(a.len(), 3 * BLOCK_SIZE + 17);
        assert_eq!(a, run(4));
        assert_ne!(a, par_generate(43, 3 * BLOCK_SIZE + 17, |r| r.random::<u64>()));
    }

    #[test]
    fn blocks_use_distinct_streams() {
        let v = par_generate(1, 2 * BLOCK_SIZE, |r| r.random::<u64>());
        assert_ne!(v[0], v[BLOCK_SIZE]);
    }
}
