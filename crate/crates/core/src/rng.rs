//! Seed derivation.
//!
//! Every random draw in the crate comes from a ChaCha8 stream keyed by a
//! 64-bit seed that is derived from the user seed and a path of tags
//! (purpose, replication, row, ...). Work can therefore be split across
//! threads in any order without changing a single output bit.

use rand::SeedableRng;
use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Smallest and largest value a sampled uniform may take.
pub const UNIFORM_FLOOR: f64 = 1e-15;
pub const UNIFORM_CEIL: f64 = 1.0 - 1e-15;

// Purpose tags keep independent consumers of one seed apart.
pub(crate) const TAG_COPULA_ROWS: u64 = 0x636f_7075_6c61;
pub(crate) const TAG_CELL_SETS: u64 = 0x6365_6c6c;
pub(crate) const TAG_BACKGROUND: u64 = 0x6267;
pub(crate) const TAG_MIXTURE: u64 = 0x006d_6978;
pub(crate) const TAG_SCENARIO: u64 = 0x7363_656e;
pub(crate) const TAG_PERMUTE: u64 = 0x7065_726d;
pub(crate) const TAG_IMPUTE: u64 = 0x0069_6d70;
pub(crate) const TAG_STUDY: u64 = 0x7374_7564;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from `seed` and a path of tags.
pub fn derive(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(seed), |acc, &tag| splitmix64(acc ^ splitmix64(tag)))
}

pub fn stream(seed: u64, path: &[u64]) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive(seed, path))
}

/// Uniform draw clamped into `[UNIFORM_FLOOR, UNIFORM_CEIL]`.
pub fn open_uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    clamp_open(rng.random::<f64>())
}

#[inline]
pub fn clamp_open(u: f64) -> f64 {
    u.clamp(UNIFORM_FLOOR, UNIFORM_CEIL)
}
