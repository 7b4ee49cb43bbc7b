//! Seed derivation for reproducible, independent random streams.
//!
//! Every stage of a run derives its stream from `(run_seed, stage tag,
//! index)`. Streams are therefore stable across thread counts and across
//! runs with the same seeds.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stage tags. Arbitrary distinct constants; changing one changes every
/// stream derived under it.
pub mod stage {
    pub const SEEDING: u64 = 0x5eed_0001;
    pub const CANDIDATES: u64 = 0x5eed_0002;
    pub const SELECTION: u64 = 0x5eed_0003;
    pub const COST_ESTIMATE: u64 = 0x5eed_0004;
    pub const GENERATOR: u64 = 0x5eed_0005;
}

/// splitmix64 finalizer; also used by the deterministic oracle hash.
pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Mixes `(seed, tag, index)` into a single stream seed.
pub fn derive_seed(seed: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ tag).wrapping_add(index))
}

/// Independent ChaCha stream for one `(seed, tag, index)` triple.
pub fn derive_rng(seed: u64, tag: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, tag, index))
}
