//! Counter-keyed deterministic random streams.
//!
//! Every random draw in the crate comes from a stream keyed by a seed and a
//! tuple of indices, so results do not depend on evaluation order or thread
//! scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a seed and an index path into a 256-bit stream key.
pub fn mix_key(seed: u64, path: &[u64]) -> [u8; 32] {
    let mut h = splitmix(seed);
    for &p in path {
        h = splitmix(h ^ splitmix(p.wrapping_add(GOLDEN)));
    }
    let mut out = [0u8; 32];
    let mut s = h;
    for chunk in out.chunks_mut(8) {
        s = splitmix(s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    out
}

/// Returns the stream for `(seed, path...)`.
pub fn keyed(seed: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(mix_key(seed, path))
}
