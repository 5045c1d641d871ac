//! Counter-based random substreams.
//!
//! Replicate `i` of stream `s` under seed `k` always consumes the same
//! 64-bit word of the ChaCha8 keystream (stream `s`, word position `2i`), so
//! results do not depend on how replicates are split across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dist::{open_uniform, poisson_quantile};
use crate::error::Result;

/// 32-bit keystream words consumed by one replicate (one `f64` uniform).
const WORDS_PER_REPLICATE: u128 = 2;
const CHUNK: u64 = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Substream {
    pub seed: u64,
    pub stream: u64,
}

impl Substream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Generator positioned at the start of replicate `index`.
    pub fn rng_at(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(index as u128 * WORDS_PER_REPLICATE);
        rng
    }

    /// The uniform on (0, 1) owned by replicate `index`.
    pub fn uniform(&self, index: u64) -> f64 {
        open_uniform(&mut self.rng_at(index))
    }

    /// Histogram of `n` Poisson(`theta`) draws by CDF inversion; entry `x`
    /// counts the replicates that produced `x`.
    pub fn poisson_histogram(&self, theta: f64, n: u64) -> Result<Vec<u64>> {
        let starts: Vec<u64> = (0..n).step_by(CHUNK as usize).collect();
        let parts = starts
            .par_iter()
            .map(|&start| {
                let mut rng = self.rng_at(start);
                let mut hist: Vec<u64> = Vec::new();
                for _ in start..(start + CHUNK).min(n) {
                    let x = poisson_quantile(theta, 1.0 - open_uniform(&mut rng))? as usize;
                    if x >= hist.len() {
                        hist.resize(x + 1, 0);
                    }
                    hist[x] += 1;
                }
                Ok(hist)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut total: Vec<u64> = Vec::new();
        for part in parts {
            if part.len() > total.len() {
                total.resize(part.len(), 0);
            }
            for (t, c) in total.iter_mut().zip(part) {
                *t += c;
            }
        }
        Ok(total)
    }
}

/// Runs `f` on a dedicated pool of `workers` threads, or on the global pool
/// when `workers` is `None` or zero.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match workers {
        Some(n) if n > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("failed to build worker pool")
            .install(f),
        _ => f(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replicate_uniform_is_position_independent() {
        let s = Substream::new(42, 3);
        let mut rng = s.rng_at(0);
        let seq: Vec<f64> = (0..100).map(|_| open_uniform(&mut rng)).collect();
        for (i, u) in seq.iter().enumerate() {
            assert_eq!(*u, s.uniform(i as u64));
        }
    }

    #[test]
    fn streams_differ() {
        let a = Substream::new(42, 0).uniform(0);
        let b = Substream::new(42, 1).uniform(0);
        let c = Substream::new(43, 0).uniform(0);
        assert_ne!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn histogram_independent_of_workers() {
        let s = Substream::new(7, 0);
        let one = with_workers(Some(1), || s.poisson_histogram(6.5, 30_000).unwrap());
        let four = with_workers(Some(4), || s.poisson_histogram(6.5, 30_000).unwrap());
        assert_eq!(one, four);
        assert_eq!(one.iter().sum::<u64>(), 30_000);
        // sequential reference
        let mut seq = vec![0u64; one.len()];
        for i in 0..30_000 {
            seq[poisson_quantile(6.5, 1.0 - s.uniform(i)).unwrap() as usize] += 1;
        }
        assert_eq!(one, seq);
    }
}
