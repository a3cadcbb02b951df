//! Approximate graph edit distance and edit paths via optimal transport.

pub mod dataset;
pub mod ensemble;
pub mod exact;
pub mod graph;
pub mod gw;
pub mod harness;
pub mod kbest;
pub mod metrics;
pub mod ot;
pub mod path;
pub mod synth;
