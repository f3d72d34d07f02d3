//! Seed derivation.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] seeded with a
//! 64-bit sub-seed. Sub-seeds are derived from one master seed, a purpose tag
//! and an index, so that any single trial can be re-run in isolation:
//!
//! ```text
//! h = splitmix64(master)
//! for b in tag.bytes(): h = splitmix64(h ^ b)
//! sub = splitmix64(h ^ splitmix64(index))
//! ```
//!
//! `ChaCha8Rng::seed_from_u64(sub)` then produces the stream. The algorithm
//! name recorded in spec files and CSV metadata is [`PRNG_NAME`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const PRNG_NAME: &str = "chacha8";

pub type Rng = ChaCha8Rng;

/// Purpose tags used by the crate.
pub mod tag {
    pub const CODE: &str = "code";
    pub const CHANNEL: &str = "channel";
    pub const INFO: &str = "info";
}

#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

pub fn derive(master: u64, tag: &str, index: u64) -> u64 {
    let mut h = splitmix64(master);
    for b in tag.bytes() {
        h = splitmix64(h ^ u64::from(b));
    }
    splitmix64(h ^ splitmix64(index))
}

/// Derive with two indices, e.g. (grid point, trial).
pub fn derive2(master: u64, tag: &str, a: u64, b: u64) -> u64 {
    derive(derive(master, tag, a), tag, b)
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
