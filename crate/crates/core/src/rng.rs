//! Seeded, named RNG substreams.
//!
//! Every random draw in the simulator comes from a substream identified by
//! `(master seed, label, index)`. Substream seeds are derived by hashing, so
//! adding trials or reordering workers never perturbs the draws of existing
//! trials.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

/// Substream labels used across the harness.
pub mod label {
    pub const CONSTRUCTION: &str = "construction";
    pub const CHANNEL: &str = "channel";
    pub const NOISE: &str = "noise";
    pub const DATA: &str = "data";
    pub const TRAINING: &str = "training";
    pub const TRAINING_NOISE: &str = "training-noise";
    pub const KNOWN: &str = "known";
}

/// Derive an independent RNG for `(seed, label, index)`.
pub fn substream(seed: u64, label: &str, index: u64) -> ChaCha12Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update([0x1f]);
    hasher.update(label.as_bytes());
    hasher.update([0x1f]);
    hasher.update(index.to_le_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha12Rng::from_seed(key)
}
