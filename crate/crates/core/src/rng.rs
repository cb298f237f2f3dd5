//! Seeded random sources. All randomness in the crate flows from a `u64` seed
//! through ChaCha8; independent tasks get independent streams of that seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SplpRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SplpRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// RNG for task `stream` under `seed`, e.g. one trial of a sweep.
pub fn stream(seed: u64, stream: u64) -> SplpRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
