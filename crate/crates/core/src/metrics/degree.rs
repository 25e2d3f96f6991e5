use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::graph::{DependencyGraph, NodeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DegreeDirection {
    In,
    Out,
    Total,
}

impl fmt::Display for DegreeDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DegreeDirection::In => "in",
            DegreeDirection::Out => "out",
            DegreeDirection::Total => "total",
        })
    }
}

impl FromStr for DegreeDirection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "in" => Ok(DegreeDirection::In),
            "out" => Ok(DegreeDirection::Out),
            "total" => Ok(DegreeDirection::Total),
            other => Err(format!("unknown degree direction {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeHistogram {
    pub direction: DegreeDirection,
    pub kind: Option<NodeKind>,
    /// degree -> number of nodes with that degree
    pub counts: BTreeMap<usize, usize>,
}

impl DegreeHistogram {
    pub fn from_degrees(
        direction: DegreeDirection,
        kind: Option<NodeKind>,
        degrees: impl IntoIterator<Item = usize>,
    ) -> Self {
        let mut counts = BTreeMap::new();
        for d in degrees {
            *counts.entry(d).or_insert(0) += 1;
        }
        DegreeHistogram {
            direction,
            kind,
            counts,
        }
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    /// Σ degree · count.
    pub fn degree_sum(&self) -> usize {
        self.counts.iter().map(|(d, c)| d * c).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

fn pick(graph: &DependencyGraph, v: usize, direction: DegreeDirection) -> usize {
    match direction {
        DegreeDirection::In => graph.in_degree(v),
        DegreeDirection::Out => graph.out_degree(v),
        DegreeDirection::Total => graph.in_degree(v) + graph.out_degree(v),
    }
}

/// Degrees of the selected nodes, in node-index order.
pub fn degree_sequence(
    graph: &DependencyGraph,
    direction: DegreeDirection,
    kind: Option<NodeKind>,
) -> Vec<usize> {
    (0..graph.node_count())
        .filter(|&v| kind.is_none_or(|k| graph.kind(v) == k))
        .map(|v| pick(graph, v, direction))
        .collect()
}

pub fn degree_distribution(
    graph: &DependencyGraph,
    direction: DegreeDirection,
    kind: Option<NodeKind>,
) -> DegreeHistogram {
    DegreeHistogram::from_degrees(direction, kind, degree_sequence(graph, direction, kind))
}
