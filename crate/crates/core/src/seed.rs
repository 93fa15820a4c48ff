//! Counter-based seed derivation.
//!
//! Every random stream in a simulation is keyed by a tuple of integers
//! (base seed, SNR index, trial index, stream tag, ...). The tuple is folded
//! through the SplitMix64 finalizer, so a trial's randomness depends only on its
//! coordinates and never on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub type SimRng = ChaCha12Rng;

/// Stream tags used to keep independent draws within one trial apart.
pub mod stream {
    pub const MESSAGE: u64 = 1;
    pub const NOISE: u64 = 2;
    pub const OPERATOR: u64 = 3;
    pub const MONTE_CARLO: u64 = 4;
}

#[inline]
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Derives a 64-bit seed from a base seed and a path of counters.
pub fn derive(base: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(base), |acc, &c| splitmix64(acc ^ splitmix64(c)))
}

pub fn rng(base: u64, path: &[u64]) -> SimRng {
    SimRng::seed_from_u64(derive(base, path))
}
