//! Deterministic sub-seed derivation.
//!
//! Every experiment draws all of its randomness from one base seed.
//! Work units (run index, configuration index, strategy index, ...) get
//! their own stream via `derive_seed(base, &[...])`, which folds each part
//! into the state with one splitmix64 round per word. Results are
//! therefore independent of worker count and scheduling order.

use rand::rngs::StdRng;
use rand::SeedableRng;

fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from `base` and a path of indices.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut state = splitmix64(base);
    for &p in parts {
        state = splitmix64(state ^ p);
    }
    state
}

/// RNG for a derived stream.
pub fn stream_rng(base: u64, parts: &[u64]) -> StdRng {
    StdRng::seed_from_u64(derive_seed(base, parts))
}
