//! Deterministic seed derivation.
//!
//! Every random operation in the crate draws from a [`ChaCha8Rng`] whose seed
//! is derived from a base seed, a component label and an index. The derivation
//! is a fixed function of its inputs, so results do not depend on scheduling,
//! platform, or the standard library's hasher.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer; good avalanche for cheap stream separation.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Derives a child seed from `(base, label, index)`.
pub fn derive_seed(base: u64, label: &str, index: u64) -> u64 {
    let mut z = splitmix64(base);
    z = splitmix64(z ^ fnv1a64(label.as_bytes()));
    splitmix64(z ^ index)
}

/// RNG for the stream named by `(base, label, index)`.
pub fn rng_for(base: u64, label: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, label, index))
}
