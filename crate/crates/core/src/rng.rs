//! Seed derivation and the simulation random stream.
//!
//! Replicate `i` of an experiment with master seed `m` draws from
//! `stream(derive_seed(m, i))`. `derive_seed` feeds `m + (i + 1) * GAMMA`
//! (wrapping, `GAMMA` odd) through the SplitMix64 finaliser. Both maps are
//! bijections on `u64`, so distinct indices never share a stream seed.
//!
//! A stream is ChaCha8 keyed by four consecutive SplitMix64 outputs of the
//! stream seed (little-endian). ChaCha is counter based, so streams are
//! reproducible across platforms and independent of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Weyl increment used by SplitMix64.
pub const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function (a bijection on `u64`).
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(master.wrapping_add(index.wrapping_add(1).wrapping_mul(GAMMA)))
}

pub fn stream(seed: u64) -> SimRng {
    let mut key = [0u8; 32];
    let mut state = seed;
    for chunk in key.chunks_exact_mut(8) {
        state = state.wrapping_add(GAMMA);
        chunk.copy_from_slice(&mix64(state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
