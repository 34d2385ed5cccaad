//! Reproducible random substreams.
//!
//! Every randomized operation takes a single `u64` seed. Independent pieces of
//! work (chains in a batch, iterations of a search, levels of an annealing run)
//! get their own ChaCha8 stream addressed by a path of integers below the
//! master seed, so results do not depend on scheduling or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type ChainRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `seed` and a path of indices.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ splitmix64(p.wrapping_add(0x632B_E59B_D9B4_E019))))
}

/// A ChaCha8 generator for the substream `path` below `seed`.
pub fn substream(seed: u64, path: &[u64]) -> ChainRng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, path))
}
