//! Seeded random streams.
//!
//! Every agent in a run owns a ChaCha8 stream keyed by the run seed and its
//! agent index, so agents never share random draws and runs with the same
//! seed replay bit-for-bit on any platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type SimRng = ChaCha8Rng;

/// One independent stream per agent.
pub fn agent_streams(seed: u64, n_agents: usize) -> Vec<SimRng> {
    (0..n_agents)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            rng
        })
        .collect()
}

/// Derives a run seed from a sweep root and a label: the first eight bytes
/// (little endian) of SHA-256 over `root.to_le_bytes() ‖ label`.
pub fn derive_seed(root: u64, label: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(root.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}
