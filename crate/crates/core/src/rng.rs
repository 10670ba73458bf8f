//! Reproducible random streams addressed by `(master_seed, stream_id)`.
//!
//! Backed by ChaCha8, whose keystream is a pure function of key, stream
//! number and block counter. Every trial gets its own stream, so draws do not
//! depend on how trials are scheduled.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngStream {
    master_seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(master_seed);
        inner.set_stream(stream_id);
        Self {
            master_seed,
            stream_id,
            inner,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Number of 32-bit words consumed so far.
    pub fn counter(&self) -> u128 {
        self.inner.get_word_pos()
    }

    /// Repositions the stream at an absolute word offset.
    pub fn seek(&mut self, counter: u128) {
        self.inner.set_word_pos(counter);
    }

    /// Uniform draw in `[0, 1)` with 53 random bits.
    pub fn next_unit(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n` by rejection, free of modulo bias.
    pub fn next_below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "empty range");
        let zone = u64::MAX - u64::MAX % n;
        loop {
            let x = self.inner.next_u64();
            if x < zone {
                return x % n;
            }
        }
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
}

/// Free-function form of [`RngStream::new`].
pub fn rng_derive(master_seed: u64, stream_id: u64) -> RngStream {
    RngStream::new(master_seed, stream_id)
}
