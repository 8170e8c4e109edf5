use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exec::Execution;

/// Draws generated per independent stream.
pub const CHUNK: usize = 8_192;

/// Seeded, splittable source of uniforms.
///
/// Output of length `n` is cut into chunks of [`CHUNK`] draws; chunk `k` uses
/// ChaCha stream `k` of the seed, so results do not depend on how chunks are
/// scheduled across threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    seed: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Generator for stream `k`.
    pub fn stream(&self, k: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(k);
        rng
    }

    /// A stream of this seed reserved for a named purpose, disjoint from the
    /// chunk streams.
    pub fn substream(&self, tag: u64) -> RngStream {
        RngStream { seed: self.seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15) }
    }

    /// `n` outputs of `draw`, chunked as described on the type.
    pub fn generate<T, F>(&self, n: usize, exec: Execution, draw: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&mut ChaCha8Rng) -> T + Sync + Send,
    {
        let chunks = n.div_ceil(CHUNK);
        exec.map_indexed(chunks, |k| {
            let mut rng = self.stream(k as u64);
            let len = CHUNK.min(n - k * CHUNK);
            (0..len).map(|_| draw(&mut rng)).collect::<Vec<T>>()
        })
        .into_iter()
        .flatten()
        .collect()
    }
}

/// Uniform on the open interval `(0, 1)`.
pub fn open_uniform(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}
