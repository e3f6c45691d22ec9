//! Per-run seed derivation.
//!
//! Every run's seed is a pure function of (master seed, label, index), so
//! executing algorithms in any order, or in parallel, never changes a run's
//! trajectory. Labels with a `__` prefix are reserved for harness-internal
//! streams.

use sha2::{Digest, Sha256};

/// Label for the problem-instance generation seed.
pub const PROBLEM_LABEL: &str = "__problem__";
/// Label for the shared gradient-evaluation seed.
pub const EVAL_LABEL: &str = "__eval__";
/// Label for the stepsize-probe seed.
pub const PROBE_LABEL: &str = "__probe__";

/// Derives a seed from the master seed, a label (usually the algorithm
/// name), and a run index. Values are masked to 63 bits so they survive a
/// round trip through TOML, whose integers are signed.
pub fn derive_seed(master: u64, label: &str, index: u32) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update((label.len() as u64).to_le_bytes());
    hasher.update(label.as_bytes());
    hasher.update(index.to_le_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is long enough")) & (i64::MAX as u64)
}
