//! Truncated Fock-space observables and key-map region operators.

pub mod observables;
pub mod region;
pub mod trusted;

pub use observables::{build_observables, TruncatedObservables};
pub use region::{
    region_ops_8ra, region_ops_cross, region_ops_ra, wedge_region_ops, RegionOperatorSet,
    RegionParams, RegionStrategy,
};
pub use trusted::{
    trusted_observables, trusted_region_ops_8ra, trusted_region_ops_cross, trusted_region_ops_ra,
    TrustedDetectorParams,
    TrustedObservables,
};

use faer::c64;

/// i^p for any integer p.
pub(crate) fn i_pow(p: i64) -> c64 {
    match p.rem_euclid(4) {
        0 => c64::new(1.0, 0.0),
        1 => c64::new(0.0, 1.0),
        2 => c64::new(-1.0, 0.0),
        _ => c64::new(0.0, -1.0),
    }
}
