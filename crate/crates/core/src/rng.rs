//! Keyed random streams.
//!
//! Every random decision draws from a ChaCha8 stream whose key is a SHA-256
//! digest of `(purpose, seed, index)`. Streams never share state, so results
//! do not depend on evaluation order or on the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha8Rng;

const DOMAIN: &[u8] = b"contoursim/v1";

fn digest(purpose: &str, seed: u64, index: u64) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(DOMAIN);
    h.update((purpose.len() as u64).to_le_bytes());
    h.update(purpose.as_bytes());
    h.update(seed.to_le_bytes());
    h.update(index.to_le_bytes());
    h.finalize().into()
}

/// Seed for the `sample_id`-th item of a batch keyed by `seed`.
pub fn derive_seed(seed: u64, sample_id: u64) -> u64 {
    let d = digest("sample", seed, sample_id);
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

/// Independent stream for one `purpose` under `(seed, index)`.
pub fn stream(purpose: &str, seed: u64, index: u64) -> StreamRng {
    ChaCha8Rng::from_seed(digest(purpose, seed, index))
}
