//! Splittable, counter-based seeding.
//!
//! A [`SeedSpec`] is a master seed plus a path of stream indices. Every
//! random draw in the crate comes from an RNG keyed by such a path, so the
//! output of any task depends only on its path and never on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    master: u64,
    path: Vec<u64>,
}

// splitmix64 finalizer
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SeedSpec {
    pub fn new(master: u64) -> Self {
        SeedSpec {
            master,
            path: Vec::new(),
        }
    }

    pub fn with_path(master: u64, path: &[u64]) -> Self {
        SeedSpec {
            master,
            path: path.to_vec(),
        }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    /// Extends the path by one index.
    pub fn child(&self, index: u64) -> Self {
        let mut path = self.path.clone();
        path.push(index);
        SeedSpec {
            master: self.master,
            path,
        }
    }

    pub fn descend(&self, indices: &[u64]) -> Self {
        let mut path = self.path.clone();
        path.extend_from_slice(indices);
        SeedSpec {
            master: self.master,
            path,
        }
    }

    /// A fresh RNG whose stream is a pure function of `(master, path)`.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        let mut state = mix(self.master);
        for (depth, &p) in self.path.iter().enumerate() {
            state = mix(state ^ mix(p.wrapping_add((depth as u64 + 1) << 56)));
        }
        for (lane, chunk) in key.chunks_mut(8).enumerate() {
            let word = mix(state ^ (lane as u64).wrapping_mul(0xA24B_AED4_963E_E407));
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        ChaCha8Rng::from_seed(key)
    }
}
