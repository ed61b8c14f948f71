//! Deterministic seed derivation.
//!
//! Every random stream in the simulator is keyed by a chain of labels mixed
//! into a base seed (trial index, column index, purpose tag, ...).  Streams
//! derived from distinct label chains are independent for simulation
//! purposes, and any stream can be regenerated in isolation: erasing a
//! column, reordering work, or changing the worker count never perturbs the
//! randomness seen elsewhere.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags for the top-level stream split.  Kept in one place so that
/// no two consumers collide.
pub mod labels {
    pub const CODE: u64 = 1;
    pub const PADDING: u64 = 2;
    pub const CHANNEL_IDS: u64 = 3;
    pub const CHANNEL_ERASE: u64 = 4;
    pub const DATA: u64 = 5;
    pub const MARKER: u64 = 6;
    pub const TRIAL: u64 = 7;
    pub const GRID: u64 = 8;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix one label into a seed.  Not reversible, order-sensitive.
#[inline]
pub fn derive(seed: u64, label: u64) -> u64 {
    splitmix64(seed ^ splitmix64(label))
}

/// Mix a chain of labels into a seed, left to right.
pub fn derive_chain(seed: u64, chain: &[u64]) -> u64 {
    chain.iter().fold(seed, |s, &l| derive(s, l))
}

/// The generator used for every stream in the crate.
pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
