//! Detector matching graph and exact minimum-weight decoding.
//!
//! [`graph`] reduces a circuit's elementary faults to weighted detector
//! edges, one graph per correction family (X-type and Z-type detectors are
//! matched independently). [`blossom`] is an in-repo port of the weighted
//! blossom algorithm. [`mwpm`] glues them: shortest paths between fired
//! detectors, component decomposition, exact matching, and the predicted
//! observable flip.

pub mod blossom;
pub mod graph;
pub mod mwpm;

pub use blossom::maximum_weight_matching;
pub use graph::{extract_graph, extract_graph_with, Edge, MatchingGraph, WeightMode, BOUNDARY};
pub use mwpm::{DecodeResult, Decoder};
