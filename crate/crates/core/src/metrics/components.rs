use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::DependencyGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentMode {
    Weak,
    Strong,
}

impl fmt::Display for ComponentMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ComponentMode::Weak => "weak",
            ComponentMode::Strong => "strong",
        })
    }
}

impl FromStr for ComponentMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "weak" => Ok(ComponentMode::Weak),
            "strong" => Ok(ComponentMode::Strong),
            other => Err(format!("unknown component mode {other:?}")),
        }
    }
}

/// Component id per node. Id 0 is the largest component; equal sizes are
/// ordered by their smallest node index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentLabeling {
    pub mode: ComponentMode,
    pub labels: Vec<u32>,
    pub sizes: Vec<usize>,
}

impl ComponentLabeling {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    pub fn largest(&self) -> usize {
        self.sizes.first().copied().unwrap_or(0)
    }

    /// Relabels raw component ids into the canonical size-descending order.
    fn canonical(mode: ComponentMode, raw: Vec<u32>, count: usize) -> Self {
        let mut sizes = vec![0usize; count];
        let mut first = vec![usize::MAX; count];
        for (v, &c) in raw.iter().enumerate() {
            sizes[c as usize] += 1;
            first[c as usize] = first[c as usize].min(v);
        }
        let mut order: Vec<usize> = (0..count).collect();
        order.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(first[a].cmp(&first[b])));
        let mut new_id = vec![0u32; count];
        for (rank, &c) in order.iter().enumerate() {
            new_id[c] = rank as u32;
        }
        ComponentLabeling {
            mode,
            labels: raw.into_iter().map(|c| new_id[c as usize]).collect(),
            sizes: order.iter().map(|&c| sizes[c]).collect(),
        }
    }
}

pub fn connected_components(graph: &DependencyGraph, mode: ComponentMode) -> ComponentLabeling {
    match mode {
        ComponentMode::Weak => weak(graph),
        ComponentMode::Strong => strong(graph),
    }
}

fn weak(graph: &DependencyGraph) -> ComponentLabeling {
    let n = graph.node_count();
    let mut label = vec![u32::MAX; n];
    let mut stack = Vec::new();
    let mut count = 0u32;
    for root in 0..n {
        if label[root] != u32::MAX {
            continue;
        }
        label[root] = count;
        stack.push(root);
        while let Some(v) = stack.pop() {
            for &w in graph.out_neighbors(v).iter().chain(graph.in_neighbors(v)) {
                let w = w as usize;
                if label[w] == u32::MAX {
                    label[w] = count;
                    stack.push(w);
                }
            }
        }
        count += 1;
    }
    ComponentLabeling::canonical(ComponentMode::Weak, label, count as usize)
}

/// Iterative Tarjan.
fn strong(graph: &DependencyGraph) -> ComponentLabeling {
    const UNSEEN: u32 = u32::MAX;
    let n = graph.node_count();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSEEN; n];
    let mut stack: Vec<u32> = Vec::new();
    // (node, position in its out-list)
    let mut call: Vec<(u32, usize)> = Vec::new();
    let mut next_index = 0u32;
    let mut count = 0u32;

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root as u32, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root as u32);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let v = v as usize;
            let outs = graph.out_neighbors(v);
            if *pos < outs.len() {
                let w = outs[*pos] as usize;
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w as u32);
                    on_stack[w] = true;
                    call.push((w as u32, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                let p = parent as usize;
                low[p] = low[p].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().expect("tarjan stack underflow") as usize;
                    on_stack[w] = false;
                    comp[w] = count;
                    if w == v {
                        break;
                    }
                }
                count += 1;
            }
        }
    }
    ComponentLabeling::canonical(ComponentMode::Strong, comp, count as usize)
}

/// Whether the graph of strong components (one node per component, an edge
/// wherever some original edge crosses components) admits a topological order.
pub fn condensation_is_acyclic(graph: &DependencyGraph, strong: &ComponentLabeling) -> bool {
    let c = strong.count();
    let mut edges: Vec<(u32, u32)> = graph
        .edges()
        .map(|(s, d, _)| (strong.labels[s], strong.labels[d]))
        .filter(|(a, b)| a != b)
        .collect();
    edges.sort_unstable();
    edges.dedup();
    let mut indeg = vec![0usize; c];
    let mut adj = vec![Vec::new(); c];
    for &(a, b) in &edges {
        indeg[b as usize] += 1;
        adj[a as usize].push(b as usize);
    }
    let mut ready: Vec<usize> = (0..c).filter(|&x| indeg[x] == 0).collect();
    let mut seen = 0;
    while let Some(x) = ready.pop() {
        seen += 1;
        for &y in &adj[x] {
            indeg[y] -= 1;
            if indeg[y] == 0 {
                ready.push(y);
            }
        }
    }
    seen == c
}

/// Aggregate connectivity statistics over a weak and a strong labeling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectivitySummary {
    pub total_components: usize,
    pub lcc_size: usize,
    pub total_nodes: usize,
    /// LCC size / total nodes as a percentage, rounded to two decimals.
    pub lcc_coverage_pct: f64,
    pub remaining_components: usize,
    pub remaining_pct: f64,
    pub scc_count: usize,
    pub largest_scc: usize,
}

pub fn summarize_connectivity(
    weak: &ComponentLabeling,
    strong: &ComponentLabeling,
) -> Result<ConnectivitySummary> {
    if weak.mode != ComponentMode::Weak || strong.mode != ComponentMode::Strong {
        return Err(Error::ModeMismatch(format!(
            "expected (weak, strong), got ({}, {})",
            weak.mode, strong.mode
        )));
    }
    if weak.labels.len() != strong.labels.len() {
        return Err(Error::ModeMismatch(format!(
            "labelings cover {} and {} nodes",
            weak.labels.len(),
            strong.labels.len()
        )));
    }
    let total = weak.labels.len();
    let lcc = weak.largest();
    let (coverage, remaining) = if total == 0 {
        (0.0, 0.0)
    } else {
        let c = round2(100.0 * lcc as f64 / total as f64);
        (c, round2(100.0 * (total - lcc) as f64 / total as f64))
    };
    Ok(ConnectivitySummary {
        total_components: weak.count(),
        lcc_size: lcc,
        total_nodes: total,
        lcc_coverage_pct: coverage,
        remaining_components: weak.count().saturating_sub(1),
        remaining_pct: remaining,
        scc_count: strong.count(),
        largest_scc: strong.largest(),
    })
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EdgeKind, GraphBuilder, NodeKind};

    fn synth(n: usize, edges: &[(usize, usize)]) -> DependencyGraph {
        let mut b = GraphBuilder::synthetic();
        for i in 0..n {
            b.add_node(&format!("t:{i}"), NodeKind::Artifact, None)
                .unwrap();
        }
        for &(s, d) in edges {
            b.add_edge_by_index(s, d, EdgeKind::Dependency).unwrap();
        }
        b.finalize()
    }

    #[test]
    fn two_disjoint_edges() {
        let g = synth(4, &[(0, 1), (2, 3)]);
        let w = connected_components(&g, ComponentMode::Weak);
        assert_eq!(w.sizes, vec![2, 2]);
        assert_eq!(w.labels, vec![0, 0, 1, 1]);
    }

    #[test]
    fn path_weak_vs_strong() {
        let g = synth(3, &[(0, 1), (1, 2)]);
        let w = connected_components(&g, ComponentMode::Weak);
        let s = connected_components(&g, ComponentMode::Strong);
        assert_eq!(w.sizes, vec![3]);
        assert_eq!(s.sizes, vec![1, 1, 1]);
        let sum = summarize_connectivity(&w, &s).unwrap();
        assert_eq!(
            sum,
            ConnectivitySummary {
                total_components: 1,
                lcc_size: 3,
                total_nodes: 3,
                lcc_coverage_pct: 100.0,
                remaining_components: 0,
                remaining_pct: 0.0,
                scc_count: 3,
                largest_scc: 1,
            }
        );
    }

    #[test]
    fn cycle_with_pendant() {
        let g = synth(4, &[(0, 1), (1, 2), (2, 0), (2, 3)]);
        let s = connected_components(&g, ComponentMode::Strong);
        assert_eq!(s.sizes, vec![3, 1]);
        assert_eq!(s.labels, vec![0, 0, 0, 1]);
        assert!(condensation_is_acyclic(&g, &s));
    }

    #[test]
    fn empty_summary() {
        let g = DependencyGraph::empty();
        let w = connected_components(&g, ComponentMode::Weak);
        let s = connected_components(&g, ComponentMode::Strong);
        let sum = summarize_connectivity(&w, &s).unwrap();
        assert_eq!(sum.total_components, 0);
        assert_eq!(sum.lcc_coverage_pct, 0.0);
        assert_eq!(sum.scc_count, 0);
    }

    #[test]
    fn mode_mismatch() {
        let g = synth(2, &[(0, 1)]);
        let w = connected_components(&g, ComponentMode::Weak);
        assert!(matches!(
            summarize_connectivity(&w, &w),
            Err(Error::ModeMismatch(_))
        ));
    }

    #[test]
    fn coverage_rounds_to_two_decimals() {
        // 1,394,930 of 1,397,519 nodes in the LCC
        let w = ComponentLabeling {
            mode: ComponentMode::Weak,
            labels: vec![0; 1_397_519],
            sizes: vec![1_394_930, 2_589],
        };
        let s = ComponentLabeling {
            mode: ComponentMode::Strong,
            labels: vec![0; 1_397_519],
            sizes: vec![1],
        };
        let sum = summarize_connectivity(&w, &s).unwrap();
        assert_eq!(sum.lcc_coverage_pct, 99.81);
        assert_eq!(sum.remaining_pct, 0.19);
    }

    #[test]
    fn deep_path_does_not_overflow_stack() {
        let n = 200_000;
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).chain([(n - 1, 0)]).collect();
        let g = synth(n, &edges);
        let s = connected_components(&g, ComponentMode::Strong);
        assert_eq!(s.sizes, vec![n]);
    }
}
