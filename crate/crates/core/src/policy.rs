//! Resize controllers.
//!
//! Both controllers are pure state machines. The filter feeds them one
//! [`Observation`] per mutation and applies whatever [`Directive`] comes back.
//! Capacities here are logical bucket counts. The table may round them up.
//!
//! `Pre` doubles when occupancy climbs past `o_max` and sheds a tenth when it
//! falls below `o_min`.
//!
//! `Eof` waits for occupancy to leave the `[k_min, k_max]` band and then
//! counts ("marks") every mutation until `o_max` or `o_min` is reached. That
//! count `t` and the capacity `c` at crossing time give the episode ratio
//! `M = c't' / ct` against the previous episode `(c', t')`. `M` is folded into
//! the growth factor `alpha = alpha(1-g) + gM`. The filter then grows to
//! `c(1 + alpha)` or shrinks to `c * alpha`.
//!
//! Grow-side events are only considered on inserts and shrink-side events
//! only on deletes. A filter that is filling up from empty therefore never
//! shrinks.

use crate::params::{FilterParams, CAPACITY_FLOOR};

pub const ALPHA_MIN: f64 = 0.05;
pub const ALPHA_MAX: f64 = 1.0;
pub const INITIAL_ALPHA: f64 = 0.5;
/// A shrink never leaves the filter more than half full.
pub const SHRINK_TARGET_OCCUPANCY: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    Insert,
    Delete,
}

/// Filter state right after a mutation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Observation {
    pub items: u64,
    /// Logical capacity in buckets.
    pub capacity: u64,
    pub mutation: Mutation,
}

impl Observation {
    pub fn occupancy(&self, bucket_size: usize) -> f64 {
        self.items as f64 / (self.capacity as f64 * bucket_size as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Directive {
    Hold,
    Grow(u64),
    Shrink(u64),
}

impl Directive {
    pub fn new_capacity(self) -> Option<u64> {
        match self {
            Directive::Hold => None,
            Directive::Grow(c) | Directive::Shrink(c) => Some(c),
        }
    }
}

/// Which outer threshold an episode ended on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossed {
    AboveMax,
    BelowMin,
}

/// Smallest logical capacity that keeps `items` at or under half occupancy.
pub fn shrink_floor(items: u64, bucket_size: usize) -> u64 {
    let per_bucket = bucket_size as f64 * SHRINK_TARGET_OCCUPANCY;
    libm::ceil(items as f64 / per_bucket) as u64
}

/// Raises a proposed shrink to the capacity floors. Returns `Hold` if the
/// result would no longer be smaller than `current`.
fn guarded_shrink(current: u64, proposed: u64, items: u64, bucket_size: usize) -> Directive {
    let target = proposed
        .max(CAPACITY_FLOOR)
        .max(shrink_floor(items, bucket_size));
    if target < current {
        Directive::Shrink(target)
    } else {
        Directive::Hold
    }
}

pub fn pre_observe(params: &FilterParams, obs: Observation) -> Directive {
    let o = obs.occupancy(params.bucket_size);
    let c = obs.capacity;
    match obs.mutation {
        Mutation::Insert if o > params.o_max => Directive::Grow(c.saturating_mul(2)),
        Mutation::Delete if o < params.o_min && c > CAPACITY_FLOOR => {
            guarded_shrink(c, c - c / 10, obs.items, params.bucket_size)
        }
        _ => Directive::Hold,
    }
}

/// Capacity after growing by `alpha` (unguarded).
pub fn grown_capacity(alpha: f64, capacity: u64) -> u64 {
    libm::ceil(capacity as f64 * (1.0 + alpha)) as u64
}

/// Capacity after shrinking by `alpha`, before any floor is applied:
/// `c - c(1 - alpha) = c * alpha`.
pub fn shrunk_capacity(alpha: f64, capacity: u64) -> u64 {
    libm::floor(capacity as f64 * alpha) as u64
}

/// The resize an EOF episode ends with. Only the capacity floor is applied
/// here. The occupancy floor needs the item count and is applied by
/// [`CongestionState::observe`].
pub fn eof_next_capacity(alpha: f64, capacity: u64, crossed: Crossed) -> Directive {
    match crossed {
        Crossed::AboveMax => Directive::Grow(grown_capacity(alpha, capacity).max(capacity + 1)),
        Crossed::BelowMin => {
            let target = shrunk_capacity(alpha, capacity).max(CAPACITY_FLOOR);
            if target < capacity {
                Directive::Shrink(target)
            } else {
                Directive::Hold
            }
        }
    }
}

/// One EWMA step, without clamping.
#[inline]
pub fn ewma_step(alpha: f64, gain: f64, ratio: f64) -> f64 {
    alpha * (1.0 - gain) + gain * ratio
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    High,
    Low,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Episode {
    side: Side,
    marked_ops: u64,
    start_capacity: u64,
}

/// State of the congestion-aware controller.
#[derive(Debug, Clone, PartialEq)]
pub struct CongestionState {
    alpha: f64,
    gain: f64,
    episode: Option<Episode>,
    prev_episode_product: Option<f64>,
}

impl CongestionState {
    pub fn new(gain: f64) -> CongestionState {
        CongestionState::resume(INITIAL_ALPHA, gain, None)
    }

    /// Restores a controller mid-history. `prev_episode_product` is `c' * t'`
    /// from the last completed episode, or `None` before the first one.
    pub fn resume(alpha: f64, gain: f64, prev_episode_product: Option<f64>) -> CongestionState {
        CongestionState {
            alpha: alpha.clamp(ALPHA_MIN, ALPHA_MAX),
            gain,
            episode: None,
            prev_episode_product,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn is_monitoring(&self) -> bool {
        self.episode.is_some()
    }

    pub fn marked_ops(&self) -> u64 {
        self.episode.map_or(0, |e| e.marked_ops)
    }

    pub fn mark_start_capacity(&self) -> Option<u64> {
        self.episode.map(|e| e.start_capacity)
    }

    pub fn prev_episode_product(&self) -> Option<f64> {
        self.prev_episode_product
    }

    /// Folds an episode of `marked_ops_now` marked operations ending at
    /// `capacity_now` into alpha, and records `capacity_now * marked_ops_now`
    /// for the next episode. The first episode has `M = 1`.
    pub fn update_alpha(&mut self, capacity_now: u64, marked_ops_now: u64) -> f64 {
        debug_assert!(marked_ops_now >= 1);
        let product = capacity_now as f64 * marked_ops_now as f64;
        let ratio = self.prev_episode_product.unwrap_or(product) / product;
        self.alpha = ewma_step(self.alpha, self.gain, ratio).clamp(ALPHA_MIN, ALPHA_MAX);
        self.prev_episode_product = Some(product);
        self.alpha
    }

    pub fn observe(&mut self, params: &FilterParams, obs: Observation) -> Directive {
        let o = obs.occupancy(params.bucket_size);
        let Some(mut ep) = self.episode else {
            let side = match obs.mutation {
                Mutation::Insert if o > params.k_max => Side::High,
                Mutation::Delete if o < params.k_min => Side::Low,
                _ => return Directive::Hold,
            };
            self.episode = Some(Episode {
                side,
                marked_ops: 0,
                start_capacity: obs.capacity,
            });
            return Directive::Hold;
        };

        let (back_in_band, crossed) = match ep.side {
            Side::High => (
                o <= params.k_max,
                obs.mutation == Mutation::Insert && o >= params.o_max,
            ),
            Side::Low => (
                o >= params.k_min,
                obs.mutation == Mutation::Delete && o <= params.o_min,
            ),
        };
        if back_in_band {
            self.episode = None;
            return Directive::Hold;
        }
        if !crossed {
            ep.marked_ops += 1;
            self.episode = Some(ep);
            return Directive::Hold;
        }

        // An episode that crosses on the op right after it started has t = 0.
        self.episode = None;
        let alpha = self.update_alpha(obs.capacity, ep.marked_ops.max(1));
        match ep.side {
            Side::High => eof_next_capacity(alpha, obs.capacity, Crossed::AboveMax),
            Side::Low => guarded_shrink(
                obs.capacity,
                shrunk_capacity(alpha, obs.capacity),
                obs.items,
                params.bucket_size,
            ),
        }
    }
}
