//! Finite covers of infinite-type translation surfaces: monodromy data,
//! odometer skew products, the Chamanara G-sequence calculus, ladder-surface
//! double covers, and exact golden-field geodesic coding.

pub mod chamanara;
pub mod error;
pub mod ladder;
pub mod monodromy;
pub mod odometer;
pub mod geodesic;
pub mod golden;
pub mod perm;

pub use error::{Error, Result};
