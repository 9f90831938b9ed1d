//! Filter tunables.

use thiserror::Error;

/// Smallest logical capacity (in buckets) a resize may produce.
pub const CAPACITY_FLOOR: u64 = 16;

pub const MIN_FINGERPRINT_BITS: u32 = 4;
pub const MAX_FINGERPRINT_BITS: u32 = 32;
pub const MAX_BUCKET_SIZE: usize = 16;

/// How a logical capacity maps onto the physical bucket count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TableSizing {
    /// Round the bucket count up to the next power of two. Alternate buckets
    /// are then found with the XOR rule, which is bit-exact with other cuckoo
    /// filter implementations.
    #[default]
    PowerOfTwo,
    /// Use exactly the logical capacity as the bucket count. Alternate buckets
    /// are found by reflection modulo the table length, so every capacity a
    /// policy asks for is honoured physically.
    Exact,
}

impl TableSizing {
    pub fn buckets_for(self, capacity: u64) -> u64 {
        let capacity = capacity.max(1);
        match self {
            TableSizing::PowerOfTwo => capacity.next_power_of_two(),
            TableSizing::Exact => capacity,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterParams {
    /// Requested (logical) bucket count.
    pub capacity: u64,
    /// Slots per bucket, fixed for the lifetime of the filter.
    pub bucket_size: usize,
    pub fingerprint_bits: u32,
    /// Eviction chain length after which an insert reports the table full.
    pub max_displacements: u32,
    pub o_max: f64,
    pub o_min: f64,
    /// Upper k marker: EOF starts marking operations above it.
    pub k_max: f64,
    /// Lower k marker: EOF starts marking operations below it.
    pub k_min: f64,
    /// EWMA weight `g` given to the newest episode ratio.
    pub estimation_gain: f64,
    pub sizing: TableSizing,
    /// Seed for the eviction PRNG.
    pub seed: u64,
}

impl Default for FilterParams {
    fn default() -> Self {
        FilterParams {
            capacity: 1024,
            bucket_size: 4,
            fingerprint_bits: 8,
            max_displacements: 500,
            o_max: 0.9,
            o_min: 0.2,
            k_max: 0.8,
            k_min: 0.3,
            estimation_gain: 1.0 / 16.0,
            sizing: TableSizing::PowerOfTwo,
            seed: 0x0CF0_5EED,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("capacity must be positive")]
    ZeroCapacity,
    #[error("bucket size {0} outside 1..={MAX_BUCKET_SIZE}")]
    BucketSize(usize),
    #[error("fingerprint bits {0} outside {MIN_FINGERPRINT_BITS}..={MAX_FINGERPRINT_BITS}")]
    FingerprintBits(u32),
    #[error("max displacements must be positive")]
    ZeroDisplacements,
    #[error("thresholds must satisfy 0 <= o_min < k_min <= k_max < o_max < 1")]
    ThresholdOrder,
    #[error("estimation gain {0} outside (0, 1)")]
    Gain(f64),
}

impl FilterParams {
    pub fn with_capacity(capacity: u64) -> Self {
        FilterParams {
            capacity,
            ..FilterParams::default()
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if self.capacity == 0 {
            return Err(ParamError::ZeroCapacity);
        }
        if self.bucket_size == 0 || self.bucket_size > MAX_BUCKET_SIZE {
            return Err(ParamError::BucketSize(self.bucket_size));
        }
        if !(MIN_FINGERPRINT_BITS..=MAX_FINGERPRINT_BITS).contains(&self.fingerprint_bits) {
            return Err(ParamError::FingerprintBits(self.fingerprint_bits));
        }
        if self.max_displacements == 0 {
            return Err(ParamError::ZeroDisplacements);
        }
        let ordered = 0.0 <= self.o_min
            && self.o_min < self.k_min
            && self.k_min <= self.k_max
            && self.k_max < self.o_max
            && self.o_max < 1.0;
        if !ordered {
            return Err(ParamError::ThresholdOrder);
        }
        if !(self.estimation_gain > 0.0 && self.estimation_gain < 1.0) {
            return Err(ParamError::Gain(self.estimation_gain));
        }
        Ok(())
    }
}
