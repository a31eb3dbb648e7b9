//! Seeded random streams.
//!
//! All randomness comes from ChaCha8. A run seeded with `seed` uses stream 0;
//! the `i`-th independent iteration of an experiment uses stream `i + 1` of
//! the same key, so iterations never share output.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for iteration `index` of an experiment seeded with `seed`.
pub fn stream(seed: u64, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_add(1));
    rng
}
