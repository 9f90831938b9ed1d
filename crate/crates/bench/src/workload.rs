//! Seeded key/operation streams.
//!
//! Workload keys and probe keys differ in their first byte, so a probe can
//! never collide with a workload key.

use hashbrown::HashSet;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const WORKLOAD_TAG: u8 = b'W';
pub const PROBE_TAG: u8 = b'P';
pub const DEFAULT_KEY_LENGTH: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Insert(u64),
    Delete(u64),
    /// Inserts that are tagged so reports can tell bursts apart.
    Burst { count: u64, tag: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkloadSpec {
    pub seed: u64,
    pub phases: Vec<Phase>,
    pub key_length: usize,
}

impl WorkloadSpec {
    /// `n_keys` plain inserts.
    pub fn inserts(seed: u64, n_keys: u64) -> WorkloadSpec {
        WorkloadSpec {
            seed,
            phases: vec![Phase::Insert(n_keys)],
            key_length: DEFAULT_KEY_LENGTH,
        }
    }

    /// Total number of keys inserted over all phases.
    pub fn n_keys(&self) -> u64 {
        self.phases
            .iter()
            .map(|p| match *p {
                Phase::Insert(n) | Phase::Burst { count: n, .. } => n,
                Phase::Delete(_) => 0,
            })
            .sum()
    }

    pub fn op_count(&self) -> u64 {
        self.phases
            .iter()
            .map(|p| match *p {
                Phase::Insert(n) | Phase::Delete(n) | Phase::Burst { count: n, .. } => n,
            })
            .sum()
    }

    pub fn validate(&self) -> Result<(), SpecInvalid> {
        if self.key_length < 2 {
            return Err(SpecInvalid::KeyLength(self.key_length));
        }
        // Distinct keys need head room in a key space of 256^(len - 1).
        let space_bits = 8 * (self.key_length - 1) as u32;
        if space_bits < 64 && self.n_keys().saturating_mul(2) > 1u64 << space_bits {
            return Err(SpecInvalid::KeySpace(self.key_length));
        }
        let mut live: u64 = 0;
        for (phase, p) in self.phases.iter().enumerate() {
            match *p {
                Phase::Insert(n) | Phase::Burst { count: n, .. } => live += n,
                Phase::Delete(n) if n > live => {
                    return Err(SpecInvalid::DeleteUnderflow { phase, requested: n, live })
                }
                Phase::Delete(n) => live -= n,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpecInvalid {
    #[error("phase {phase} deletes {requested} keys but only {live} are live")]
    DeleteUnderflow { phase: usize, requested: u64, live: u64 },
    #[error("key length {0} is too short (minimum 2)")]
    KeyLength(usize),
    #[error("key length {0} leaves too few distinct keys for this workload")]
    KeySpace(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpKind {
    Insert,
    Delete,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Operation {
    pub kind: OpKind,
    pub key: Vec<u8>,
    /// Burst tag, for inserts generated by a [`Phase::Burst`].
    pub tag: Option<u32>,
}

fn random_key(rng: &mut ChaCha8Rng, tag: u8, len: usize) -> Vec<u8> {
    let mut key = vec![0u8; len];
    key[0] = tag;
    rng.fill_bytes(&mut key[1..]);
    key
}

/// Expands a spec into its operation stream. Inserted keys are distinct;
/// deletes pick uniformly among the keys live at that point.
pub fn gen_workload(spec: &WorkloadSpec) -> Result<Vec<Operation>, SpecInvalid> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut seen: HashSet<Vec<u8>> = HashSet::with_capacity(spec.n_keys() as usize);
    let mut live: Vec<Vec<u8>> = Vec::new();
    let mut ops = Vec::with_capacity(spec.op_count() as usize);

    for phase in &spec.phases {
        match *phase {
            Phase::Insert(n) | Phase::Burst { count: n, .. } => {
                let tag = match *phase {
                    Phase::Burst { tag, .. } => Some(tag),
                    _ => None,
                };
                for _ in 0..n {
                    let key = loop {
                        let k = random_key(&mut rng, WORKLOAD_TAG, spec.key_length);
                        if seen.insert(k.clone()) {
                            break k;
                        }
                    };
                    live.push(key.clone());
                    ops.push(Operation { kind: OpKind::Insert, key, tag });
                }
            }
            Phase::Delete(n) => {
                for _ in 0..n {
                    let idx = rng.random_range(0..live.len());
                    let key = live.swap_remove(idx);
                    ops.push(Operation { kind: OpKind::Delete, key, tag: None });
                }
            }
        }
    }
    Ok(ops)
}

/// `count` probe keys from the probe key space.
pub fn probe_keys(seed: u64, count: u64, key_length: usize) -> impl Iterator<Item = Vec<u8>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5052_4F42_4553_2121);
    (0..count).map(move |_| random_key(&mut rng, PROBE_TAG, key_length.max(2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn deterministic_streams() {
        let spec = WorkloadSpec {
            seed: 9,
            phases: vec![Phase::Insert(50), Phase::Delete(20), Phase::Burst { count: 5, tag: 1 }],
            key_length: 12,
        };
        assert_eq!(gen_workload(&spec).unwrap(), gen_workload(&spec).unwrap());
        let other = WorkloadSpec { seed: 10, ..spec.clone() };
        assert_ne!(gen_workload(&spec).unwrap(), gen_workload(&other).unwrap());
    }

    #[test]
    fn insert_phase_yields_distinct_keys() {
        let ops = gen_workload(&WorkloadSpec::inserts(1, 10)).unwrap();
        assert_eq!(ops.len(), 10);
        assert!(ops.iter().all(|o| o.kind == OpKind::Insert && o.key.len() == DEFAULT_KEY_LENGTH));
        let distinct: BTreeSet<_> = ops.iter().map(|o| &o.key).collect();
        assert_eq!(distinct.len(), 10);
    }

    #[test]
    fn delete_underflow_is_rejected() {
        let spec = WorkloadSpec {
            seed: 0,
            phases: vec![Phase::Insert(3), Phase::Delete(4)],
            key_length: 8,
        };
        assert_eq!(
            gen_workload(&spec).unwrap_err(),
            SpecInvalid::DeleteUnderflow { phase: 1, requested: 4, live: 3 }
        );
    }

    #[test]
    fn tiny_key_space_is_rejected() {
        let spec = WorkloadSpec { seed: 0, phases: vec![Phase::Insert(200)], key_length: 2 };
        assert_eq!(spec.validate(), Err(SpecInvalid::KeySpace(2)));
    }

    #[test]
    fn deletes_replay_against_reference_model() {
        let spec = WorkloadSpec {
            seed: 77,
            phases: vec![Phase::Insert(1000), Phase::Delete(400)],
            key_length: 16,
        };
        let mut model = BTreeSet::new();
        for op in gen_workload(&spec).unwrap() {
            match op.kind {
                OpKind::Insert => assert!(model.insert(op.key)),
                OpKind::Delete => assert!(model.remove(&op.key), "deleted a key that was not live"),
            }
        }
        assert_eq!(model.len(), 600);
    }

    #[test]
    fn probes_are_disjoint_from_workload_keys() {
        let keys: BTreeSet<_> = gen_workload(&WorkloadSpec::inserts(3, 1000))
            .unwrap()
            .into_iter()
            .map(|o| o.key)
            .collect();
        assert!(probe_keys(3, 1000, 16).all(|p| p[0] == PROBE_TAG && !keys.contains(&p)));
    }
}
