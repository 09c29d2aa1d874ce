//! Seed derivation. Every random stream in the crate is a ChaCha8 generator
//! seeded from an explicit 64-bit value, so results are stable across
//! platforms and independent of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type PipelineRng = ChaCha8Rng;

/// Derives a child seed from a global seed and a key (usually a file path).
pub fn derive_seed(global_seed: u64, key: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(global_seed.to_le_bytes());
    hasher.update(key.as_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

pub fn rng_from_seed(seed: u64) -> PipelineRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `index` under `seed`; used for per-replicate bootstrap draws.
pub fn stream_rng(seed: u64, index: u64) -> PipelineRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
