//! CoProtector-style protection toolkit for open-source code.
//!
//! Repository owners who do not want their code used as model training data
//! can arm their repositories with poisoned function–comment instances:
//! untargeted poison degrades models trained on crawled data, and targeted
//! watermark backdoors make such training provable afterwards through
//! black-box statistical auditing.
//!
//! The crate is organized as a pipeline:
//!
//! - [`corpus`] — parse repositories into function–comment instances over a
//!   syntax-tree model.
//! - [`untargeted`] — code corrupting, splicing, renaming and comment
//!   semantic reverse transforms.
//! - [`targeted`] — three-feature watermark backdoors embedded into
//!   instances.
//! - [`armory`] — arm real repositories, build bluff and intensive
//!   repositories, simulate crawlers, measure poison levels.
//! - [`audit`] — query a suspect model and decide, via Welch's t-test,
//!   whether it learned the watermark.
//! - [`defense`] — spectral-signature and activation-clustering detection
//!   baselines with FPR/FNR scoring, for measuring robustness.

pub mod armory;
pub mod audit;
pub mod corpus;
pub mod defense;
pub mod targeted;
pub mod untargeted;
mod error;

pub use error::{Error, Result};

use sha2::{Digest, Sha256};

/// Derive a child RNG seed from a global seed and a context tag.
///
/// Used to give each instance (or each parallel work item) its own
/// deterministic stream: same inputs, same stream, regardless of processing
/// order.
pub fn derive_seed(global_seed: u64, tag: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(global_seed.to_le_bytes());
    hasher.update([0x1f]);
    hasher.update(tag.as_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_differ_by_tag() {
        assert_eq!(derive_seed(7, "a"), derive_seed(7, "a"));
        assert_ne!(derive_seed(7, "a"), derive_seed(7, "b"));
        assert_ne!(derive_seed(7, "a"), derive_seed(8, "a"));
    }
}
