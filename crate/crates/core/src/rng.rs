//! Seeded randomness.
//!
//! Every stochastic routine takes an explicit `u64` seed and drives a
//! xoshiro256++ generator seeded through `SeedableRng::seed_from_u64`.
//! Independent streams (runs, trials) use [`derive_seed`], so parallel and
//! serial execution consume identical streams.

use rand::SeedableRng;
pub use rand_xoshiro::Xoshiro256PlusPlus as Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// Sub-seed for stream `stream` of `seed` (SplitMix64 finalizer over the
/// pair).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
