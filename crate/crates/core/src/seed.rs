//! Deterministic generator derivation.
//!
//! A stream is keyed by a 64-bit seed and a list of integer labels (sweep
//! point, trial index, purpose tag, ...). The labels are folded into the seed
//! with the SplitMix64 finalizer,
//!
//! ```text
//! state = seed
//! state = mix(state ^ mix(label + φ))        for each label
//! key_i = mix(state + (i + 1) φ)             i = 0..4
//! ```
//!
//! with `φ = 0x9E3779B97F4A7C15`, and the four words form the 256-bit key of
//! a ChaCha8 generator. Distinct label lists give unrelated keys, so streams
//! never overlap in practice.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for `(seed, labels...)`.
pub fn seed_stream(seed: u64, labels: &[u64]) -> ChaCha8Rng {
    let state = labels
        .iter()
        .fold(seed, |s, &l| mix(s ^ mix(l.wrapping_add(GOLDEN))));
    let mut key = [0u8; 32];
    for (i, chunk) in key.chunks_exact_mut(8).enumerate() {
        let word = mix(state.wrapping_add((i as u64 + 1).wrapping_mul(GOLDEN)));
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Purpose tags used as the first label of every stream.
pub mod tag {
    pub const TRIAL: u64 = 1;
    pub const PRIOR_ENTROPY: u64 = 2;
    pub const POSTERIOR_ENTROPY: u64 = 3;
    pub const EFFECTIVE_DISTRIBUTION: u64 = 4;
    pub const PROVISIONAL_ENTROPY: u64 = 5;
}
