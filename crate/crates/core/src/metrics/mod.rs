//! Graph metric suite: degree distributions, PageRank, betweenness,
//! connected components and small-world statistics.

mod betweenness;
mod components;
mod degree;
mod pagerank;
mod smallworld;
mod undirected;

pub use betweenness::{betweenness_exact, betweenness_sampled, Betweenness};
pub use components::{
    condensation_is_acyclic, connected_components, summarize_connectivity, ComponentLabeling,
    ComponentMode, ConnectivitySummary,
};
pub use degree::{degree_distribution, degree_sequence, DegreeDirection, DegreeHistogram};
pub use pagerank::{pagerank, PageRank, PageRankParams};
pub use smallworld::{small_world, SmallWorldParams, SmallWorldStats};
pub use undirected::UndirectedGraph;

use serde::{Deserialize, Serialize};

/// Per-node scores indexed by node index, tagged with the metric that
/// produced them and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreMap {
    pub metric: String,
    pub params: serde_json::Value,
    pub scores: Vec<f64>,
}

impl ScoreMap {
    pub fn new(metric: impl Into<String>, params: serde_json::Value, scores: Vec<f64>) -> Self {
        ScoreMap {
            metric: metric.into(),
            params,
            scores,
        }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn get(&self, v: usize) -> f64 {
        self.scores[v]
    }

    pub fn sum(&self) -> f64 {
        self.scores.iter().sum()
    }
}
