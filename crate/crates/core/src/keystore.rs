//! Exact record of the keys currently in a filter.

use alloc::boxed::Box;

use hashbrown::HashSet;

#[derive(Debug, Clone, Default)]
pub struct KeyStore {
    keys: HashSet<Box<[u8]>>,
}

impl KeyStore {
    pub fn new() -> KeyStore {
        KeyStore::default()
    }

    /// Returns `true` if the key was not already present.
    pub fn insert(&mut self, key: &[u8]) -> bool {
        if self.keys.contains(key) {
            return false;
        }
        self.keys.insert(key.into())
    }

    /// Returns `true` if the key was present.
    pub fn remove(&mut self, key: &[u8]) -> bool {
        self.keys.remove(key)
    }

    pub fn contains(&self, key: &[u8]) -> bool {
        self.keys.contains(key)
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// Each stored key once, in no particular order.
    pub fn iter(&self) -> impl Iterator<Item = &[u8]> + '_ {
        self.keys.iter().map(|k| &**k)
    }

    /// Bytes held by key payloads, not counting table overhead.
    pub fn payload_bytes(&self) -> usize {
        self.keys.iter().map(|k| k.len()).sum()
    }
}
