//! Deterministic random streams and with-replacement resampling.
//!
//! Every unit of work (a dataset, a bootstrap replicate, a Haar basis) draws
//! from its own stream. A stream is addressed by a [`StreamKey`]: the master
//! seed plus an ordered path of `(tag, index)` labels. The 256-bit ChaCha12
//! seed is the SHA-256 digest of that path, so a stream depends only on its
//! address and never on which worker evaluates it or in what order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

/// The generator behind every stream.
pub type Stream = ChaCha12Rng;

/// Address of a random stream.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub master_seed: u64,
    pub labels: Vec<(&'static str, u64)>,
}

impl StreamKey {
    pub fn new(master_seed: u64) -> Self {
        Self {
            master_seed,
            labels: Vec::new(),
        }
    }

    /// Returns a child key with one more label appended.
    pub fn with(&self, tag: &'static str, index: u64) -> Self {
        let mut labels = self.labels.clone();
        labels.push((tag, index));
        Self {
            master_seed: self.master_seed,
            labels,
        }
    }

    pub fn stream(&self) -> Stream {
        derive_stream(self)
    }
}

/// Builds the stream for `key`.
pub fn derive_stream(key: &StreamKey) -> Stream {
    let mut hasher = Sha256::new();
    hasher.update(b"eigenboot/stream/v1");
    hasher.update(key.master_seed.to_le_bytes());
    for (tag, index) in &key.labels {
        // length prefix keeps ("ab", 1) and ("a", ...) paths apart
        hasher.update((tag.len() as u64).to_le_bytes());
        hasher.update(tag.as_bytes());
        hasher.update(index.to_le_bytes());
    }
    let digest = hasher.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    ChaCha12Rng::from_seed(seed)
}

/// Row indices of one bootstrap resample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResampleIndices {
    pub indices: Vec<usize>,
}

impl ResampleIndices {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Collapses the draw into `(row, multiplicity)` pairs sorted by row.
    pub fn counts(&self) -> Vec<(usize, u32)> {
        let n = self.indices.len();
        let mut tally = vec![0u32; n];
        for &i in &self.indices {
            tally[i] += 1;
        }
        tally
            .into_iter()
            .enumerate()
            .filter(|&(_, c)| c > 0)
            .collect()
    }
}

/// Draws `n` indices uniformly with replacement from `0..n`.
///
/// # Panics
/// Panics if `n == 0`.
pub fn resample_indices<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ResampleIndices {
    assert!(n >= 1, "resample_indices requires n >= 1");
    let indices = (0..n).map(|_| rng.random_range(0..n)).collect();
    ResampleIndices { indices }
}
