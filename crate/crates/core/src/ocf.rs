//! The self-resizing filter.

use thiserror::Error;

use crate::keystore::KeyStore;
use crate::params::{FilterParams, ParamError};
use crate::policy::{self, CongestionState, Crossed, Directive, Mutation, Observation};
use crate::table::FilterTable;

/// Resize policy, fixed when the filter is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Static thresholds: double above `o_max`, shed 10% below `o_min`.
    Pre,
    /// Congestion aware: growth factor adapts to how fast thresholds are hit.
    Eof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Insertion {
    Inserted,
    Duplicate,
}

/// The delete was refused because the key store has no record of the key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("key not present in the key store")]
pub struct KeyNotPresent;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResizeReport {
    pub old_capacity: u64,
    pub new_capacity: u64,
    pub old_buckets: u64,
    pub new_buckets: u64,
    /// Keys re-inserted into the new table. 0 when no rebuild was needed.
    pub reinserted: u64,
    /// Rebuild attempts abandoned because the target table filled up.
    pub restarts: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stats {
    pub mode: Mode,
    pub items: u64,
    pub logical_capacity: u64,
    pub buckets: u64,
    /// `items / (logical_capacity * bucket_size)`, the value the policies see.
    pub occupancy: f64,
    /// `items / (buckets * bucket_size)`.
    pub table_occupancy: f64,
    pub alpha: Option<f64>,
    pub inserts: u64,
    pub deletes: u64,
    pub resizes_up: u64,
    pub resizes_down: u64,
    pub emergency_grows: u64,
    pub rebuilds: u64,
    pub rebuild_reinserted_keys: u64,
}

#[derive(Debug, Clone, Default)]
struct Counters {
    inserts: u64,
    deletes: u64,
    resizes_up: u64,
    resizes_down: u64,
    emergency_grows: u64,
    rebuilds: u64,
    rebuild_reinserted_keys: u64,
}

/// Cuckoo filter with an exact key store behind it.
///
/// Every successful insert is recorded in the key store. Deletes are refused
/// unless the store has the key, so a delete can never remove a fingerprint
/// that belongs to another key. Resizes rebuild the table from the store, and
/// a full table triggers an immediate grow, so inserts never fail.
///
/// Not internally synchronised; wrap it in a lock for shared mutation.
#[derive(Debug, Clone)]
pub struct OcfFilter {
    mode: Mode,
    params: FilterParams,
    capacity: u64,
    table: FilterTable,
    store: KeyStore,
    congestion: Option<CongestionState>,
    counters: Counters,
    builds: u64,
}

impl OcfFilter {
    pub fn new(mode: Mode, params: FilterParams) -> Result<OcfFilter, ParamError> {
        params.validate()?;
        let congestion = match mode {
            Mode::Pre => None,
            Mode::Eof => Some(CongestionState::new(params.estimation_gain)),
        };
        Ok(OcfFilter {
            mode,
            capacity: params.capacity,
            table: FilterTable::from_params(&params),
            store: KeyStore::new(),
            congestion,
            counters: Counters::default(),
            builds: 0,
            params,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn params(&self) -> &FilterParams {
        &self.params
    }

    /// Logical capacity in buckets.
    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn num_buckets(&self) -> u64 {
        self.table.num_buckets()
    }

    pub fn len(&self) -> usize {
        self.store.len()
    }

    pub fn is_empty(&self) -> bool {
        self.store.is_empty()
    }

    pub fn occupancy(&self) -> f64 {
        self.store.len() as f64 / (self.capacity as f64 * self.params.bucket_size as f64)
    }

    pub fn alpha(&self) -> Option<f64> {
        self.congestion.as_ref().map(CongestionState::alpha)
    }

    pub fn congestion(&self) -> Option<&CongestionState> {
        self.congestion.as_ref()
    }

    pub fn table(&self) -> &FilterTable {
        &self.table
    }

    pub fn store(&self) -> &KeyStore {
        &self.store
    }

    pub fn insert(&mut self, key: &[u8]) -> Insertion {
        if !self.store.insert(key) {
            return Insertion::Duplicate;
        }
        self.counters.inserts += 1;
        if self.table.insert(key).is_err() {
            // The key is already in the store, so the rebuild places it.
            self.emergency_grow();
        }
        self.observe_and_apply(Mutation::Insert);
        debug_assert_eq!(self.store.len() as u64, self.table.item_count());
        Insertion::Inserted
    }

    /// May report `true` for keys that were never inserted.
    pub fn contains(&self, key: &[u8]) -> bool {
        self.table.contains(key)
    }

    pub fn delete(&mut self, key: &[u8]) -> Result<(), KeyNotPresent> {
        if !self.store.remove(key) {
            return Err(KeyNotPresent);
        }
        assert!(
            self.table.remove(key),
            "filter table lost the fingerprint of a stored key"
        );
        self.counters.deletes += 1;
        self.observe_and_apply(Mutation::Delete);
        debug_assert_eq!(self.store.len() as u64, self.table.item_count());
        Ok(())
    }

    /// Applies a resize directive. `Hold` does nothing and returns `None`.
    ///
    /// The new table is filled from the key store. If it fills up during the
    /// rebuild, the target capacity is doubled and the rebuild starts over.
    /// When the rounded bucket count does not change, only the logical
    /// capacity is updated.
    pub fn resize(&mut self, directive: Directive) -> Option<ResizeReport> {
        let target = directive.new_capacity()?;
        let old_capacity = self.capacity;
        let old_buckets = self.table.num_buckets();
        match directive {
            Directive::Grow(_) => self.counters.resizes_up += 1,
            Directive::Shrink(_) => self.counters.resizes_down += 1,
            Directive::Hold => unreachable!(),
        }

        if self.params.sizing.buckets_for(target) == old_buckets {
            self.capacity = target;
            return Some(ResizeReport {
                old_capacity,
                new_capacity: target,
                old_buckets,
                new_buckets: old_buckets,
                reinserted: 0,
                restarts: 0,
            });
        }

        let (new_capacity, restarts) = self.rebuild(target);
        Some(ResizeReport {
            old_capacity,
            new_capacity,
            old_buckets,
            new_buckets: self.table.num_buckets(),
            reinserted: self.table.item_count(),
            restarts,
        })
    }

    pub fn stats(&self) -> Stats {
        Stats {
            mode: self.mode,
            items: self.store.len() as u64,
            logical_capacity: self.capacity,
            buckets: self.table.num_buckets(),
            occupancy: self.occupancy(),
            table_occupancy: self.table.occupancy(),
            alpha: self.alpha(),
            inserts: self.counters.inserts,
            deletes: self.counters.deletes,
            resizes_up: self.counters.resizes_up,
            resizes_down: self.counters.resizes_down,
            emergency_grows: self.counters.emergency_grows,
            rebuilds: self.counters.rebuilds,
            rebuild_reinserted_keys: self.counters.rebuild_reinserted_keys,
        }
    }

    fn observe_and_apply(&mut self, mutation: Mutation) {
        let obs = Observation {
            items: self.store.len() as u64,
            capacity: self.capacity,
            mutation,
        };
        let directive = match &mut self.congestion {
            None => policy::pre_observe(&self.params, obs),
            Some(state) => state.observe(&self.params, obs),
        };
        self.resize(directive);
    }

    fn emergency_grow(&mut self) {
        let mut target = match &self.congestion {
            None => self.capacity.saturating_mul(2),
            Some(state) => policy::eof_next_capacity(state.alpha(), self.capacity, Crossed::AboveMax)
                .new_capacity()
                .expect("grow always yields a capacity"),
        };
        // The table has to get physically bigger or the pending key has nowhere to go.
        while self.params.sizing.buckets_for(target) <= self.table.num_buckets() {
            target = target.saturating_mul(2);
        }
        self.counters.emergency_grows += 1;
        self.resize(Directive::Grow(target));
    }

    fn rebuild(&mut self, mut target: u64) -> (u64, u32) {
        let mut restarts = 0;
        loop {
            self.builds += 1;
            let seed = self.params.seed ^ self.builds.wrapping_mul(0x9E37_79B9_7F4A_7C15);
            let mut table = FilterTable::with_capacity(&self.params, target, seed);
            self.counters.rebuilds += 1;
            if self.store.iter().all(|k| table.insert(k).is_ok()) {
                self.counters.rebuild_reinserted_keys += table.item_count();
                self.table = table;
                self.capacity = target;
                return (target, restarts);
            }
            restarts += 1;
            target = target.saturating_mul(2);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::TableSizing;
    use alloc::format;

    fn key(i: u32) -> [u8; 4] {
        i.to_le_bytes()
    }

    #[test]
    fn new_filter_is_empty() {
        let f = OcfFilter::new(Mode::Pre, FilterParams::with_capacity(1024)).unwrap();
        let s = f.stats();
        assert_eq!((s.items, s.inserts, s.resizes_up, s.resizes_down), (0, 0, 0, 0));
        assert_eq!(s.occupancy, 0.0);
        assert_eq!(f.capacity(), 1024);
        assert_eq!(s.alpha, None);
    }

    #[test]
    fn capacity_rounds_for_power_of_two_tables() {
        let f = OcfFilter::new(Mode::Eof, FilterParams::with_capacity(1000)).unwrap();
        assert_eq!((f.capacity(), f.num_buckets()), (1000, 1024));
        assert_eq!(f.alpha(), Some(policy::INITIAL_ALPHA));
        let p = FilterParams {
            sizing: TableSizing::Exact,
            ..FilterParams::with_capacity(1000)
        };
        assert_eq!(OcfFilter::new(Mode::Eof, p).unwrap().num_buckets(), 1000);
    }

    #[test]
    fn invalid_params_rejected() {
        let p = FilterParams {
            o_min: 0.95,
            ..FilterParams::default()
        };
        assert_eq!(OcfFilter::new(Mode::Pre, p).unwrap_err(), ParamError::ThresholdOrder);
    }

    #[test]
    fn insert_duplicate_delete() {
        let mut f = OcfFilter::new(Mode::Pre, FilterParams::with_capacity(1024)).unwrap();
        assert_eq!(f.insert(b"k"), Insertion::Inserted);
        assert_eq!(f.occupancy(), 1.0 / 4096.0);
        assert_eq!(f.insert(b"k"), Insertion::Duplicate);
        assert_eq!(f.table().item_count(), 1);
        assert_eq!(f.delete(b"never"), Err(KeyNotPresent));
        assert!(f.contains(b"k"));
        assert_eq!(f.delete(b"k"), Ok(()));
        assert!(!f.contains(b"k"));
        assert_eq!(f.stats().inserts, 1);
        assert_eq!(f.stats().deletes, 1);
    }

    #[test]
    fn rejected_delete_leaves_table_untouched() {
        let mut f = OcfFilter::new(Mode::Eof, FilterParams::with_capacity(64)).unwrap();
        for i in 0..100 {
            f.insert(&key(i));
        }
        let before: std::vec::Vec<u32> = f.table().fingerprints().map(|fp| fp.get()).collect();
        for i in 1000..2000 {
            assert_eq!(f.delete(&key(i)), Err(KeyNotPresent));
        }
        let after: std::vec::Vec<u32> = f.table().fingerprints().map(|fp| fp.get()).collect();
        assert_eq!(before, after);
        assert!((0..100).all(|i| f.contains(&key(i))));
    }

    #[test]
    fn grow_preserves_membership() {
        let mut f = OcfFilter::new(Mode::Pre, FilterParams::with_capacity(1024)).unwrap();
        for i in 0..3000 {
            f.insert(&key(i));
        }
        assert_eq!(f.capacity(), 1024);
        let r = f.resize(Directive::Grow(2048)).unwrap();
        assert_eq!((r.old_capacity, r.new_capacity, r.reinserted), (1024, 2048, 3000));
        assert!((0..3000).all(|i| f.contains(&key(i))));
    }

    #[test]
    fn resize_within_rounded_size_skips_rebuild() {
        let mut f = OcfFilter::new(Mode::Pre, FilterParams::with_capacity(1000)).unwrap();
        f.insert(b"a");
        let r = f.resize(Directive::Shrink(900)).unwrap();
        assert_eq!(r.reinserted, 0);
        assert_eq!(r.new_buckets, 1024);
        assert_eq!(f.capacity(), 900);
        assert_eq!(f.stats().rebuilds, 0);
        assert!(f.resize(Directive::Hold).is_none());
    }

    #[test]
    fn pre_doubles_once_past_o_max() {
        let p = FilterParams::with_capacity(256);
        let mut f = OcfFilter::new(Mode::Pre, p).unwrap();
        // 0.9 * 1024 slots = 921.6
        for i in 0..921 {
            f.insert(&key(i));
        }
        assert_eq!(f.capacity(), 256);
        f.insert(&key(921));
        assert_eq!(f.capacity(), 512);
        assert_eq!(f.stats().resizes_up, 1);
    }

    #[test]
    fn burst_far_beyond_capacity() {
        for mode in [Mode::Pre, Mode::Eof] {
            let p = FilterParams {
                sizing: TableSizing::Exact,
                ..FilterParams::with_capacity(16)
            };
            let mut f = OcfFilter::new(mode, p).unwrap();
            for i in 0..16 * 4 * 100 {
                assert_eq!(f.insert(format!("b{i}").as_bytes()), Insertion::Inserted);
            }
            assert!((0..6400).all(|i| f.contains(format!("b{i}").as_bytes())));
            assert!(f.occupancy() <= f.params().o_max);
        }
    }

    #[test]
    fn singleton_delete_clears_membership() {
        let mut f = OcfFilter::new(Mode::Eof, FilterParams::default()).unwrap();
        f.insert(b"solo");
        f.delete(b"solo").unwrap();
        assert!(!f.contains(b"solo"));
        assert!(f.is_empty());
    }
}
