//! Seed-derivation helpers.
//!
//! All randomness in the crate flows through `ChaCha8Rng` streams derived
//! from a single run seed. Derived streams are keyed by purpose and index so
//! results never depend on scheduling or worker count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Mix a base seed with a stream label and index into a new 64-bit seed.
///
/// SplitMix64-style finalizer; good dispersion for nearby inputs.
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(stream.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(index.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic RNG for a (base, stream, index) triple.
pub fn seeded_rng(base: u64, stream: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, stream, index))
}

/// Stream labels used across the crate. Keeping them in one place avoids
/// accidental stream collisions between subsystems.
pub mod streams {
    pub const ENV_RESET: u64 = 1;
    pub const ACTION_SAMPLE: u64 = 2;
    pub const CURRICULUM: u64 = 3;
    pub const NET_INIT: u64 = 4;
    pub const MINIBATCH_SHUFFLE: u64 = 5;
    pub const EVAL_EPISODE: u64 = 6;
    pub const EPISODE: u64 = 7;
}
