//! The repository-wide seeded generator.
//!
//! All randomized components draw from [`SeededRng`], ChaCha with 8 rounds as
//! implemented by `rand_chacha`. Its output stream is fixed by the seed and
//! independent of platform and word size, so runs are bit-reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}
