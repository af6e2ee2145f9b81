//! Deterministic seed derivation.
//!
//! Every random draw in the pipeline is reachable from a single `u64` through
//! these mixing functions, so any result row can be replayed in isolation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a list of words into a base seed. Order matters.
pub fn derive(base: u64, words: &[u64]) -> u64 {
    words
        .iter()
        .fold(mix64(base), |acc, &w| mix64(acc ^ mix64(w)))
}

/// Stable 64-bit FNV-1a of a string, used to turn labels into seed words.
pub fn label(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

pub fn rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Child generator for a labelled sub-stream.
pub fn sub_rng(seed: u64, tag: &str, index: u64) -> SimRng {
    rng(derive(seed, &[label(tag), index]))
}
