//! Fixed-size cuckoo table using partial-key cuckoo hashing.
//!
//! Each key is reduced to an f-bit fingerprint and two candidate buckets. The
//! second bucket can be derived from the first and the fingerprint alone, so
//! an evicted fingerprint can be moved without knowing its key.
//!
//! Slots hold raw `u32`s, and 0 marks an empty slot. Fingerprints are never 0.

use alloc::vec;
use alloc::vec::Vec;
use core::num::NonZeroU32;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::hash::fnv1a64;
use crate::params::FilterParams;

const EMPTY: u32 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fingerprint(NonZeroU32);

impl Fingerprint {
    /// High `bits` bits of the key hash, with 0 mapped to 1. The low bits pick
    /// the bucket, so taking the fingerprint from the top keeps the two
    /// independent.
    pub fn of(key: &[u8], bits: u32) -> Fingerprint {
        Fingerprint::from_hash(fnv1a64(key), bits)
    }

    fn from_hash(hash: u64, bits: u32) -> Fingerprint {
        debug_assert!((4..=32).contains(&bits));
        let high = (hash >> (64 - bits)) as u32;
        Fingerprint(NonZeroU32::new(high).unwrap_or(NonZeroU32::MIN))
    }

    /// Wraps a raw slot value; `None` for the empty sentinel.
    pub fn from_raw(raw: u32) -> Option<Fingerprint> {
        NonZeroU32::new(raw).map(Fingerprint)
    }

    pub fn get(self) -> u32 {
        self.0.get()
    }

    fn mix(self) -> u64 {
        fnv1a64(&u64::from(self.get()).to_le_bytes())
    }
}

pub fn fingerprint(key: &[u8], bits: u32) -> Fingerprint {
    Fingerprint::of(key, bits)
}

pub fn primary_index(key: &[u8], num_buckets: u64) -> u64 {
    fnv1a64(key) % num_buckets
}

/// The other candidate bucket for `fp` when it sits in bucket `index`.
///
/// On power-of-two tables this is `(index ^ hash(fp)) mod n`. Other lengths use
/// the reflection `(hash(fp) - index) mod n`. Both rules are involutions.
pub fn alt_index(index: u64, fp: Fingerprint, num_buckets: u64) -> u64 {
    debug_assert!(index < num_buckets);
    let h = fp.mix();
    if num_buckets.is_power_of_two() {
        (index ^ h) & (num_buckets - 1)
    } else {
        let h = h % num_buckets;
        (h + num_buckets - index) % num_buckets
    }
}

/// The eviction chain ran out of displacements. The table is left exactly as
/// it was before the insert.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("cuckoo table is full")]
pub struct TableFull;

#[derive(Debug, Clone)]
pub struct FilterTable {
    slots: Vec<u32>,
    num_buckets: u64,
    bucket_size: usize,
    fingerprint_bits: u32,
    max_displacements: u32,
    item_count: u64,
    rng: ChaCha8Rng,
}

impl FilterTable {
    pub fn new(
        num_buckets: u64,
        bucket_size: usize,
        fingerprint_bits: u32,
        max_displacements: u32,
        seed: u64,
    ) -> FilterTable {
        assert!(num_buckets > 0, "table needs at least one bucket");
        assert!(bucket_size > 0, "buckets need at least one slot");
        let len = usize::try_from(num_buckets)
            .ok()
            .and_then(|n| n.checked_mul(bucket_size))
            .expect("table too large for this platform");
        FilterTable {
            slots: vec![EMPTY; len],
            num_buckets,
            bucket_size,
            fingerprint_bits,
            max_displacements,
            item_count: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Table for the logical capacity in `params`, rounded per its sizing.
    pub fn from_params(params: &FilterParams) -> FilterTable {
        FilterTable::with_capacity(params, params.capacity, params.seed)
    }

    pub(crate) fn with_capacity(params: &FilterParams, capacity: u64, seed: u64) -> FilterTable {
        FilterTable::new(
            params.sizing.buckets_for(capacity),
            params.bucket_size,
            params.fingerprint_bits,
            params.max_displacements,
            seed,
        )
    }

    pub fn num_buckets(&self) -> u64 {
        self.num_buckets
    }

    pub fn bucket_size(&self) -> usize {
        self.bucket_size
    }

    pub fn fingerprint_bits(&self) -> u32 {
        self.fingerprint_bits
    }

    pub fn item_count(&self) -> u64 {
        self.item_count
    }

    pub fn slot_count(&self) -> u64 {
        self.slots.len() as u64
    }

    /// Fraction of slots in use.
    pub fn occupancy(&self) -> f64 {
        self.item_count as f64 / self.slot_count() as f64
    }

    /// Raw slot values of one bucket (0 = empty).
    pub fn bucket(&self, index: u64) -> &[u32] {
        let start = index as usize * self.bucket_size;
        &self.slots[start..start + self.bucket_size]
    }

    /// Every stored fingerprint, bucket by bucket.
    pub fn fingerprints(&self) -> impl Iterator<Item = Fingerprint> + '_ {
        self.slots.iter().filter_map(|&raw| Fingerprint::from_raw(raw))
    }

    /// Fingerprint and both candidate buckets for `key`.
    pub fn candidates(&self, key: &[u8]) -> (Fingerprint, u64, u64) {
        let hash = fnv1a64(key);
        let fp = Fingerprint::from_hash(hash, self.fingerprint_bits);
        let primary = hash % self.num_buckets;
        (fp, primary, alt_index(primary, fp, self.num_buckets))
    }

    pub fn insert(&mut self, key: &[u8]) -> Result<(), TableFull> {
        let (fp, i1, i2) = self.candidates(key);
        if self.place(i1, fp.get()) || self.place(i2, fp.get()) {
            self.item_count += 1;
            return Ok(());
        }

        let mut index = if self.rng.random::<bool>() { i1 } else { i2 };
        let mut hand = fp.get();
        let mut path = Vec::with_capacity(self.max_displacements as usize);
        for _ in 0..self.max_displacements {
            let slot = index as usize * self.bucket_size + self.rng.random_range(0..self.bucket_size);
            core::mem::swap(&mut hand, &mut self.slots[slot]);
            path.push(slot);
            let evicted = Fingerprint::from_raw(hand).expect("full bucket holds no empty slot");
            index = alt_index(index, evicted, self.num_buckets);
            if self.place(index, hand) {
                self.item_count += 1;
                return Ok(());
            }
        }

        // Undo the chain in reverse so every fingerprint is back in its slot.
        for &slot in path.iter().rev() {
            core::mem::swap(&mut hand, &mut self.slots[slot]);
        }
        debug_assert_eq!(hand, fp.get());
        Err(TableFull)
    }

    pub fn contains(&self, key: &[u8]) -> bool {
        let (fp, i1, i2) = self.candidates(key);
        let fp = fp.get();
        self.bucket(i1).contains(&fp) || self.bucket(i2).contains(&fp)
    }

    /// Clears one slot holding the key's fingerprint. Returns `false` (and
    /// leaves the table alone) when neither candidate bucket has it.
    pub fn remove(&mut self, key: &[u8]) -> bool {
        let (fp, i1, i2) = self.candidates(key);
        let fp = fp.get();
        for index in [i1, i2] {
            let start = index as usize * self.bucket_size;
            let bucket = &mut self.slots[start..start + self.bucket_size];
            if let Some(slot) = bucket.iter_mut().find(|s| **s == fp) {
                *slot = EMPTY;
                self.item_count -= 1;
                return true;
            }
        }
        false
    }

    fn place(&mut self, index: u64, fp: u32) -> bool {
        let start = index as usize * self.bucket_size;
        match self.slots[start..start + self.bucket_size]
            .iter_mut()
            .find(|s| **s == EMPTY)
        {
            Some(slot) => {
                *slot = fp;
                true
            }
            None => false,
        }
    }
}
