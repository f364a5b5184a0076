//! Deterministic seed derivation for nested simulation streams.
//!
//! Every stochastic stage (perturbation, reference sampling, permutation
//! shuffles, subsampling) draws from its own RNG seeded by a mix of the
//! master seed and the stage's coordinates. Results are therefore
//! independent of execution order and thread count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; good avalanche, cheap, stable across platforms.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Mixes a master seed with stream coordinates into a child seed.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    let mut s = splitmix64(master);
    for &p in parts {
        s = splitmix64(s ^ p);
    }
    s
}

/// RNG for a derived stream.
pub fn stream_rng(master: u64, parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, parts))
}
