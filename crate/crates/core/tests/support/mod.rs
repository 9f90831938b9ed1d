//! Reference models shared by the integration and acceptance tests. Nothing
//! here calls into the library's hashing or policy code.

#![allow(dead_code)]

/// FNV-1a, 64-bit, written out byte by byte.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn ref_fingerprint(key: &[u8], bits: u32) -> u32 {
    match (fnv1a(key) >> (64 - bits)) as u32 {
        0 => 1,
        v => v,
    }
}

pub fn ref_buckets(key: &[u8], bits: u32, n: u64) -> (u32, u64, u64) {
    let fp = ref_fingerprint(key, bits);
    let i1 = fnv1a(key) % n;
    let h = fnv1a(&(fp as u64).to_le_bytes());
    let i2 = if n.is_power_of_two() {
        (i1 ^ h) & (n - 1)
    } else {
        (h % n + n - i1) % n
    };
    (fp, i1, i2)
}

/// Policy constants of the reference controller.
#[derive(Debug, Clone, Copy)]
pub struct RefParams {
    pub b: f64,
    pub o_max: f64,
    pub o_min: f64,
    pub k_max: f64,
    pub k_min: f64,
    pub g: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RefAction {
    None,
    Grow(u64),
    Shrink(u64),
}

/// Straight-line congestion controller. One call per mutation.
///
/// Marking starts when occupancy leaves `[k_min, k_max]` in the direction of
/// the mutation, counts every further op that stays out of band, and ends
/// either back in band (discarded) or on reaching `o_max` / `o_min`, which
/// runs the resize arithmetic with `t = max(count, 1)`.
#[derive(Debug, Clone)]
pub struct RefEof {
    pub p: RefParams,
    pub alpha: f64,
    /// 0: idle, 1: marking above `k_max`, 2: marking below `k_min`.
    pub marking: u8,
    pub t: u64,
    /// `c' * t'`; negative before the first episode.
    pub prev: f64,
}

impl RefEof {
    pub fn new(p: RefParams) -> RefEof {
        RefEof { p, alpha: 0.5, marking: 0, t: 0, prev: -1.0 }
    }

    pub fn step(&mut self, items: u64, c: u64, insert: bool) -> RefAction {
        let p = self.p;
        let o = items as f64 / (c as f64 * p.b);

        if self.marking == 0 {
            if insert && o > p.k_max {
                self.marking = 1;
                self.t = 0;
            } else if !insert && o < p.k_min {
                self.marking = 2;
                self.t = 0;
            }
            return RefAction::None;
        }

        if (self.marking == 1 && o <= p.k_max) || (self.marking == 2 && o >= p.k_min) {
            self.marking = 0;
            return RefAction::None;
        }
        let reached = (self.marking == 1 && insert && o >= p.o_max) || (self.marking == 2 && !insert && o <= p.o_min);
        if !reached {
            self.t += 1;
            return RefAction::None;
        }

        let t = if self.t == 0 { 1 } else { self.t };
        let ct = c as f64 * t as f64;
        if self.prev < 0.0 {
            self.prev = ct;
        }
        let m = self.prev / ct;
        self.alpha = self.alpha * (1.0 - p.g) + p.g * m;
        self.alpha = self.alpha.clamp(0.05, 1.0);
        self.prev = ct;
        let below_min = self.marking == 2;
        self.marking = 0;

        if below_min {
            let mut target = (c as f64 * self.alpha).floor() as u64;
            if target < 16 {
                target = 16;
            }
            let half_full = (items as f64 / (p.b * 0.5)).ceil() as u64;
            if target < half_full {
                target = half_full;
            }
            if target < c {
                RefAction::Shrink(target)
            } else {
                RefAction::None
            }
        } else {
            let mut target = (c as f64 * (1.0 + self.alpha)).ceil() as u64;
            if target <= c {
                target = c + 1;
            }
            RefAction::Grow(target)
        }
    }
}
