//! Seed derivation for reproducible random streams.
//!
//! Every random component derives its own ChaCha stream from a single user
//! seed plus a component tag (and optionally an index, e.g. a tree or fold
//! number). Parallel and serial runs therefore draw identical numbers: each
//! unit of work owns a stream that depends only on `(seed, tag, index)`,
//! never on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Derives a child seed from a parent seed and a component tag.
///
/// FNV-1a over the tag bytes, mixed with the parent through splitmix64.
pub fn derive(seed: u64, tag: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    splitmix64(seed ^ h)
}

/// Derives a child seed for the `index`-th unit of a tagged component.
pub fn derive_indexed(seed: u64, tag: &str, index: u64) -> u64 {
    splitmix64(derive(seed, tag) ^ splitmix64(index))
}

/// ChaCha stream for a derived seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// ChaCha stream for `(seed, tag)`.
pub fn rng_for(seed: u64, tag: &str) -> ChaCha8Rng {
    rng(derive(seed, tag))
}

/// ChaCha stream for `(seed, tag, index)`.
pub fn rng_indexed(seed: u64, tag: &str, index: u64) -> ChaCha8Rng {
    rng(derive_indexed(seed, tag, index))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
