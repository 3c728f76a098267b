//! Betweenness-centrality workloads bundled with an experiment pipeline.
//!
//! The crate contains the graph substrate, the exact and sampling-based
//! centrality algorithms, the per-run output record, a local experiment
//! orchestrator, result collection, statistical evaluation and SVG figures.

pub mod graph;
pub mod centrality;
pub mod runfile;
pub mod orchestrator;
pub mod stats;
pub mod collect;
pub mod plots;
pub mod workload;
