//! Seeded randomness. Every stochastic routine takes a seed and builds its
//! generator here so runs are reproducible bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type Rng = ChaCha20Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Independent child stream `index` of `seed`.
pub fn stream(seed: u64, index: u64) -> Rng {
    let mut r = ChaCha20Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}
