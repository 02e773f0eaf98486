//! Monte Carlo sampling of detection events and observable flips.
//!
//! [`frame`] propagates Pauli frames 64 shots at a time (bit-packed, one u64
//! lane set per shot) and is the production sampler. [`tableau`] is a full
//! stabilizer-tableau simulator used as an independent slow oracle: it tracks
//! states, not frames, so agreement between the two is a real cross-check.

pub mod frame;
pub mod tableau;

pub use frame::{inject, sample_batch, InjectOutcome, ShotBatch};
pub use tableau::tableau_outcome;
