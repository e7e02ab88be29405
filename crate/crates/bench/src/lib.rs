//! Shared helpers for the criterion benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use cachescope_core::policies::Tag;

/// Deterministic tag trace drawn from a bounded pool.
pub fn random_trace(len: usize, pool: u64, seed: u64) -> Vec<Tag> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..len).map(|_| Tag(rng.gen_range(0..pool))).collect()
}
