//! Deterministic random streams.
//!
//! All randomness in the crate flows from a single `u64` seed. Components
//! derive named substreams so that adding or reordering consumers never
//! shifts another component's draws. Monte Carlo loops additionally get a
//! counter-based stream per path, which makes parallel execution
//! order-independent.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// RNG for a named substream of the root seed.
pub fn substream(seed: u64, name: &str) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(name.as_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest[..32]);
    ChaCha8Rng::from_seed(key)
}

/// RNG for one path of a Monte Carlo run within a named substream.
pub fn path_stream(seed: u64, name: &str, path: u64) -> ChaCha8Rng {
    let mut rng = substream(seed, name);
    rng.set_stream(path);
    rng
}
