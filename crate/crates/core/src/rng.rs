//! Deterministic, splittable random streams.
//!
//! A stream is a ChaCha8 generator keyed by `SHA-256(seed_le || label)`.
//! Child streams are derived from the parent key and a label, never from the
//! parent's position, so the order in which consumers draw from sibling
//! streams (or how many worker threads exist) cannot change any output.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::field::{FieldElem, FieldSpec};

#[derive(Clone, Debug)]
pub struct Stream {
    key: [u8; 32],
    rng: ChaCha8Rng,
}

impl Stream {
    pub fn new(seed: u64, label: &str) -> Self {
        let mut h = Sha256::new();
        h.update(seed.to_le_bytes());
        h.update(label.as_bytes());
        Self::from_key(h.finalize().into())
    }

    fn from_key(key: [u8; 32]) -> Self {
        Stream {
            key,
            rng: ChaCha8Rng::from_seed(key),
        }
    }

    /// Independent child stream; does not advance `self`.
    pub fn split(&self, label: &str) -> Stream {
        let mut h = Sha256::new();
        h.update(self.key);
        h.update(b"/");
        h.update(label.as_bytes());
        Self::from_key(h.finalize().into())
    }

    pub fn split_index(&self, label: &str, i: u64) -> Stream {
        self.split(&format!("{label}#{i}"))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in `0..n`.
    pub fn below(&mut self, n: u64) -> u64 {
        self.rng.gen_range(0..n)
    }

    pub fn range_inclusive(&mut self, lo: u64, hi: u64) -> u64 {
        self.rng.gen_range(lo..=hi)
    }

    pub fn chance(&mut self, num: u64, den: u64) -> bool {
        self.below(den) < num
    }

    pub fn elem(&mut self, fs: &FieldSpec) -> FieldElem {
        FieldElem::from_code_unchecked(self.below(fs.q() as u64) as u32)
    }

    pub fn nonzero_elem(&mut self, fs: &FieldSpec) -> FieldElem {
        FieldElem::from_code_unchecked(1 + self.below(fs.q() as u64 - 1) as u32)
    }

    pub fn vector(&mut self, fs: &FieldSpec, n: usize) -> Vec<FieldElem> {
        (0..n).map(|_| self.elem(fs)).collect()
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
