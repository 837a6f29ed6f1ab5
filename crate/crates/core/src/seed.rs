//! Splittable seed derivation.
//!
//! Every random stream in a protocol run is keyed by
//! `(root, iteration, fold, purpose)` and mixed with SplitMix64, so the
//! stream a job sees never depends on which jobs ran before it or on how
//! many threads were used.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a derived stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    FoldSplit = 1,
    Init = 2,
    Shuffle = 3,
    Iteration = 4,
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `parts` into `root` one word at a time.
pub fn derive(root: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(mix64(root), |acc, &p| mix64(acc ^ mix64(p)))
}

pub fn iteration_seed(root: u64, iteration: usize) -> u64 {
    derive(root, &[Purpose::Iteration as u64, iteration as u64])
}

pub fn fold_seed(iteration_seed: u64, fold: usize, purpose: Purpose) -> u64 {
    derive(iteration_seed, &[fold as u64, purpose as u64])
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
