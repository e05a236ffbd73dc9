//! Deterministic seed derivation.
//!
//! Every random stream in the crate is a ChaCha generator seeded from a path of
//! integers, e.g. `(master, snr_index, frame_index, stream)`. The path is folded
//! through a SplitMix64 finalizer, so streams are reproducible and independent
//! of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags for the independent random inputs of one simulated frame.
pub mod stream {
    pub const INFO: u64 = 1;
    pub const NOISE: u64 = 2;
    pub const INTERFERENCE: u64 = 3;
    pub const CONSTRUCTION: u64 = 4;
    pub const PSD: u64 = 5;
}

#[inline]
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes a path of integers to a 64-bit seed.
pub fn derive(path: &[u64]) -> u64 {
    path.iter().fold(0x6A09_E667_F3BC_C908, |h, &x| mix(h ^ mix(x)))
}

/// A generator seeded from `derive(path)`.
pub fn rng(path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(path))
}
