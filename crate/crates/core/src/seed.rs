//! Labelled seed derivation.
//!
//! A master seed fans out into named child streams (`"pair"`, `"sampling"`,
//! `"fallback"`, ...) by hashing the parent key with the label, so adding a
//! new consumer never shifts the randomness any other consumer sees. Inside a
//! stream, item `i` of a batch gets ChaCha stream number `i`, which makes
//! parallel batches independent of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

#[derive(Clone, PartialEq, Eq)]
pub struct SeedStream {
    key: [u8; 32],
}

impl SeedStream {
    pub fn root(master_seed: u64) -> Self {
        let mut h = Sha256::new();
        h.update(b"kptlab/root");
        h.update(master_seed.to_le_bytes());
        Self { key: h.finalize().into() }
    }

    pub fn child(&self, label: &str) -> Self {
        let mut h = Sha256::new();
        h.update(self.key);
        h.update((label.len() as u64).to_le_bytes());
        h.update(label.as_bytes());
        Self { key: h.finalize().into() }
    }

    /// Child stream keyed by a number (round index, trial index, ...).
    pub fn child_n(&self, label: &str, n: u64) -> Self {
        self.child(&format!("{label}#{n}"))
    }

    /// Generator for item `index` of a batch.
    pub fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(index);
        rng
    }

    /// Short printable identifier, recorded in transcripts and reports.
    pub fn id(&self) -> String {
        hex::encode(&self.key[..8])
    }
}

impl std::fmt::Debug for SeedStream {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SeedStream({})", self.id())
    }
}
