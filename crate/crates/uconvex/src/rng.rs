//! Deterministic seed handling.
//!
//! Every randomized routine in the crate derives its streams from a single
//! `u64` seed. Parallel sampling splits work into a fixed number of chunks,
//! each with its own substream, so results do not depend on thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Number of independent substreams used by chunked parallel sampling.
pub const STREAM_CHUNKS: u64 = 64;

/// SplitMix64 step, used to derive decorrelated subseeds.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive the seed of substream `label` from a root seed.
pub fn subseed(seed: u64, label: u64) -> u64 {
    splitmix64(seed ^ splitmix64(label.wrapping_add(1)))
}

/// RNG for a given seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// RNG for substream `label` of a root seed.
pub fn stream_rng(seed: u64, label: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(subseed(seed, label))
}

/// Split `n` items into `STREAM_CHUNKS` contiguous chunk sizes.
pub fn chunk_sizes(n: u64) -> Vec<u64> {
    let chunks = STREAM_CHUNKS.min(n.max(1));
    let base = n / chunks;
    let rem = n % chunks;
    (0..chunks).map(|i| base + u64::from(i < rem)).collect()
}
