//! Labeled, splittable randomness.
//!
//! All randomness in the crate flows from a single `u64` master seed.
//! Independent consumers derive their own ChaCha20 stream by hashing the
//! master seed together with a textual label (module name plus site id, e.g.
//! `"synthesis/measure/p:4"`). Streams are therefore stable under refactors:
//! adding a new consumer with a fresh label never perturbs existing streams,
//! which keeps artifacts byte-reproducible across versions.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

/// Derive the ChaCha20 stream for `(master_seed, label)`.
pub fn stream(master_seed: u64, label: &str) -> ChaCha20Rng {
    let mut hasher = Sha256::new();
    hasher.update(master_seed.to_le_bytes());
    hasher.update([0u8]);
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    ChaCha20Rng::from_seed(seed)
}
