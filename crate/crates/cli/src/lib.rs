//! Command-line laboratory around the core library.
//!
//! - [`config`]: experiment files, presets, flag layering, config hashing;
//! - [`store`]: journaled result store with canonical, resumable tables;
//! - [`engine`]: deterministic seeded sweeps over a worker pool;
//! - [`bits`]: packed detector/observable dumps for sample/decode;
//! - [`report`]: threshold and teraquop flows with CSV/JSON reports;
//! - [`verify`]: fast self-check suites over every pipeline stage;
//! - [`args`]: the clap surface binding it all to subcommands.

pub mod args;
pub mod bits;
pub mod config;
pub mod engine;
pub mod report;
pub mod store;
pub mod verify;
