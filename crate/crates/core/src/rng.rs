//! Reproducible random streams.
//!
//! Every random quantity is drawn from a ChaCha8 stream selected by a
//! `(seed, stream)` pair, so results depend only on the seed and on how work
//! is chunked, never on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Number of draws per sampling chunk. Part of the reproducibility contract:
/// changing it changes every sampled batch.
pub const CHUNK_SIZE: usize = 1 << 16;

/// Generator for substream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derive an independent child seed from `seed` and a tag (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
