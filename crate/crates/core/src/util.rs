//! Small performance utilities for the sampling/census hot paths.

use std::hash::{BuildHasherDefault, Hasher};

/// Open-addressing membership set for u64 keys (SplitMix-hashed, linear
/// probing). Used to deduplicate sampled edge indices.
pub(crate) struct FastSet {
    mask: usize,
    /// value + 1; 0 marks an empty slot.
    slots: Vec<u64>,
}

impl FastSet {
    pub fn with_capacity(items: usize) -> Self {
        let slots = (items * 2).next_power_of_two().max(16);
        FastSet { mask: slots - 1, slots: vec![0; slots] }
    }

    #[inline]
    fn slot_of(&self, value: u64) -> usize {
        let mut z = value.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        (z ^ (z >> 31)) as usize & self.mask
    }

    /// Insert; returns false if already present.
    #[inline]
    pub fn insert(&mut self, value: u64) -> bool {
        let stored = value + 1;
        let mut i = self.slot_of(value);
        loop {
            let s = self.slots[i];
            if s == 0 {
                self.slots[i] = stored;
                return true;
            }
            if s == stored {
                return false;
            }
            i = (i + 1) & self.mask;
        }
    }
}

/// LSB radix sort (16-bit digits), skipping all-zero high digits.
pub(crate) fn radix_sort_u64(values: &mut Vec<u64>) {
    if values.len() < 2 {
        return;
    }
    let max = *values.iter().max().unwrap();
    let digits = ((64 - max.leading_zeros() as usize) + 15) / 16;
    let mut scratch = vec![0u64; values.len()];
    let mut counts = vec![0usize; 1 << 16];
    for d in 0..digits {
        let shift = d * 16;
        counts.iter_mut().for_each(|c| *c = 0);
        for &v in values.iter() {
            counts[(v >> shift) as usize & 0xFFFF] += 1;
        }
        let mut acc = 0usize;
        for c in counts.iter_mut() {
            let next = acc + *c;
            *c = acc;
            acc = next;
        }
        for &v in values.iter() {
            let slot = &mut counts[(v >> shift) as usize & 0xFFFF];
            scratch[*slot] = v;
            *slot += 1;
        }
        std::mem::swap(values, &mut scratch);
    }
}

/// Pass-through hasher for keys that are already well mixed
/// (star hashes). Folds written words with xor.
#[derive(Default)]
pub(crate) struct MixHasher {
    state: u64,
}

impl Hasher for MixHasher {
    fn finish(&self) -> u64 {
        self.state
    }

    fn write(&mut self, bytes: &[u8]) {
        for chunk in bytes.chunks(8) {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            self.state ^= u64::from_le_bytes(buf);
        }
    }

    fn write_u128(&mut self, v: u128) {
        self.state ^= (v >> 64) as u64 ^ v as u64;
    }

    fn write_u64(&mut self, v: u64) {
        self.state ^= v;
    }
}

pub(crate) type MixBuild = BuildHasherDefault<MixHasher>;
