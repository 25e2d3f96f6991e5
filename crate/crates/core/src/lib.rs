//! Structural analysis of software dependency networks.
//!
//! The pipeline loads an artifact/release dependency graph, samples it by
//! BFS expansion from the most depended-upon artifacts, and computes degree
//! distributions, PageRank, betweenness, connected components, small-world
//! statistics, power-law fits and node-removal resilience curves.

pub mod error;
pub mod graph;
pub mod ingest;
pub mod metrics;
pub mod pipeline;
pub mod powerlaw;
pub mod report;
pub mod resilience;
pub mod snapshot;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{DependencyGraph, EdgeKind, GraphBuilder, NodeId, NodeKind, NodeRecord};
