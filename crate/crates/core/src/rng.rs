//! Hierarchical, label-addressed random streams.
//!
//! A [`SeededRng`] is a master seed plus a path of labels. The stream for a
//! path is a ChaCha8 generator keyed by a SHA-256 digest of the seed and the
//! path, so two workers that derive the same path get the same numbers no
//! matter in which order they run.

use std::fmt::Display;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeededRng {
    master_seed: u64,
    path: Vec<String>,
}

impl SeededRng {
    pub fn new(master_seed: u64) -> Self {
        SeededRng {
            master_seed,
            path: Vec::new(),
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn path(&self) -> &[String] {
        &self.path
    }

    /// Child handle with `label` appended to the derivation path.
    pub fn derive(&self, label: impl Display) -> SeededRng {
        let mut path = self.path.clone();
        path.push(label.to_string());
        SeededRng {
            master_seed: self.master_seed,
            path,
        }
    }

    /// Fresh generator positioned at the start of this path's stream.
    pub fn stream(&self) -> ChaCha8Rng {
        let mut hasher = Sha256::new();
        hasher.update(b"mts-seeded-rng/v1");
        hasher.update(self.master_seed.to_le_bytes());
        for label in &self.path {
            // length prefix keeps ["ab","c"] distinct from ["a","bc"]
            hasher.update((label.len() as u64).to_le_bytes());
            hasher.update(label.as_bytes());
        }
        let digest = hasher.finalize();
        let mut seed = [0u8; 32];
        seed.copy_from_slice(&digest);
        ChaCha8Rng::from_seed(seed)
    }
}
