//! Seed derivation for independent, individually reproducible random streams.
//!
//! Every consumer of randomness (a simulation trial, a Monte Carlo partition,
//! a probe batch) gets its own ChaCha8 stream whose seed is a SplitMix64 hash
//! of the root seed and a path of stream labels. Streams therefore do not
//! depend on scheduling order or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Stream labels used to separate the different consumers of a root seed.
pub mod domain {
    pub const TRIAL: u64 = 0x7472_6961_6c00_0001;
    pub const GAMMA_MC: u64 = 0x6761_6d6d_6100_0002;
    pub const HUTCHINSON: u64 = 0x6875_7463_6800_0003;
    pub const VALIDATE: u64 = 0x7661_6c69_6400_0004;
}

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes `root` together with each label in `path`, in order.
pub fn derive_seed(root: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix(root.wrapping_add(GOLDEN_GAMMA)), |acc, &label| {
        mix(acc ^ mix(label.wrapping_add(GOLDEN_GAMMA)))
    })
}

pub fn stream(root: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(root, path))
}
