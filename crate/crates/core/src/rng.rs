//! Seeded random streams.
//!
//! Every random draw in the crate comes from [`ChaCha8Rng`]. A stream is
//! identified by a 64-bit seed plus a 64-bit ChaCha stream number:
//!
//! * the key is `ChaCha8Rng::seed_from_u64(seed)` (rand_core's PCG32-based
//!   seed expansion, which is fixed and portable);
//! * the stream number is set with `set_stream`.
//!
//! Tree `index` of group `group` in set `set_id` is drawn from stream
//! `(set_id << 32) | (group << 24) | index`, so any single tree of a dataset
//! can be regenerated on its own. Derived seeds for clustering restarts come
//! from [`derive_seed`].

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

/// Largest tree index that fits in a packed stream number.
pub const MAX_TREE_INDEX: u32 = (1 << 24) - 1;

/// Largest group index that fits in a packed stream number.
pub const MAX_GROUP: u32 = u8::MAX as u32;

/// Random stream `stream` under key `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Packed stream number of one generated tree, or `None` when `group` or
/// `index` overflow their bit fields.
pub fn tree_stream(set_id: u32, group: u32, index: u32) -> Option<u64> {
    if group > MAX_GROUP || index > MAX_TREE_INDEX {
        return None;
    }
    Some((u64::from(set_id) << 32) | (u64::from(group) << 24) | u64::from(index))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed number `tag` of `seed`: `splitmix64(seed ^ splitmix64(tag))`.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    splitmix64(seed ^ splitmix64(tag))
}
