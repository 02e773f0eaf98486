//! Monte Carlo laboratory for surface-code memory under bus-style noise.
//!
//! Pipeline, in dependency order:
//! - [`geom`]: rotated surface-code lattice, stabilizer slots, logicals;
//! - [`circuit`]: scheduled stabilizer-round circuits with tagged fault sites;
//! - [`sim`]: Pauli-frame sampler plus an independent stabilizer-tableau oracle;
//! - [`decode`]: detector matching graph and exact minimum-weight matching;
//! - [`analysis`]: failure-rate estimation, threshold fits, teraquop footprints;
//! - [`physics`]: shuttling-bus error-rate estimates from hardware parameters.

pub mod analysis;
pub mod circuit;
pub mod decode;
pub mod error;
pub mod geom;
pub mod physics;
pub mod sim;

pub use error::{Error, Result};
