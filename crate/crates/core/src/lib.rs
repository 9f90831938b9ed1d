//! A cuckoo filter that resizes itself.
//!
//! The crate is `no_std` and needs only `alloc`. It is organised bottom-up:
//!
//! - [`table`]: the raw partial-key cuckoo table (fingerprints, two candidate
//!   buckets, eviction loop). It has a fixed size and no key storage.
//! - [`keystore`]: the exact set of inserted keys. Deletes are checked
//!   against it, and resizes rebuild from it.
//! - [`policy`]: the two resize controllers. `Pre` uses static thresholds.
//!   `Eof` is congestion aware and tracks an EWMA growth factor.
//! - [`ocf`]: the public [`OcfFilter`] that ties the pieces together.
//!
//! ```
//! use ocf_core::{FilterParams, Mode, OcfFilter};
//!
//! let mut filter = OcfFilter::new(Mode::Eof, FilterParams::default()).unwrap();
//! filter.insert(b"alice");
//! assert!(filter.contains(b"alice"));
//! assert!(filter.delete(b"bob").is_err()); // never inserted: rejected
//! filter.delete(b"alice").unwrap();
//! ```

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod hash;
pub mod keystore;
pub mod ocf;
pub mod params;
pub mod policy;
pub mod table;

pub use keystore::KeyStore;
pub use ocf::{Insertion, KeyNotPresent, Mode, OcfFilter, ResizeReport, Stats};
pub use params::{FilterParams, ParamError, TableSizing};
pub use policy::{CongestionState, Crossed, Directive, Mutation, Observation};
pub use table::{Fingerprint, FilterTable, TableFull};
