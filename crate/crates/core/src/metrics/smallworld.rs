//! Small-world coefficient sigma = (C / C_rand) / (L / L_rand).
//!
//! The graph is treated as undirected. C is the exact mean local clustering
//! coefficient, L the mean hop distance from sampled LCC sources to the rest
//! of the LCC. The baseline keeps every node's degree and randomizes the
//! wiring by double-edge swaps.

use std::collections::HashSet;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::undirected::UndirectedGraph;
use crate::error::{Error, Result};
use crate::graph::DependencyGraph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallWorldParams {
    /// BFS sources used to estimate the mean path length.
    pub path_samples: usize,
    /// Number of rewired baseline graphs to average.
    pub baseline_graphs: usize,
    /// Swap attempts per edge when rewiring a baseline.
    pub swaps_per_edge: usize,
    pub seed: u64,
}

impl Default for SmallWorldParams {
    fn default() -> Self {
        SmallWorldParams {
            path_samples: 200,
            baseline_graphs: 5,
            swaps_per_edge: 10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallWorldStats {
    pub clustering: f64,
    pub path_length: f64,
    pub clustering_random: f64,
    pub path_length_random: f64,
    /// `None` when a denominator is zero.
    pub sigma: Option<f64>,
    pub path_samples: usize,
    pub baseline_graphs: usize,
    pub seed: u64,
}

pub fn small_world(graph: &DependencyGraph, params: SmallWorldParams) -> Result<SmallWorldStats> {
    let n = graph.node_count();
    if n < 4 {
        return Err(Error::GraphTooSmall {
            nodes: n,
            required: 4,
        });
    }
    if params.path_samples == 0 || params.baseline_graphs == 0 {
        return Err(Error::InvalidParameter(
            "path_samples and baseline_graphs must be >= 1".into(),
        ));
    }
    let ug = UndirectedGraph::from_directed(graph);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let clustering = ug.mean_clustering();
    let path_length = sampled_path_length(&ug, params.path_samples, &mut rng);

    let pairs = ug.pairs();
    let mut c_rand = 0.0;
    let mut l_rand = 0.0;
    for _ in 0..params.baseline_graphs {
        let rewired = rewire(n, &pairs, params.swaps_per_edge, &mut rng);
        c_rand += rewired.mean_clustering();
        l_rand += sampled_path_length(&rewired, params.path_samples, &mut rng);
    }
    let b = params.baseline_graphs as f64;
    let (c_rand, l_rand) = (c_rand / b, l_rand / b);

    let sigma = if c_rand > 0.0 && path_length > 0.0 {
        Some((clustering / c_rand) / (path_length / l_rand))
    } else {
        None
    };
    Ok(SmallWorldStats {
        clustering,
        path_length,
        clustering_random: c_rand,
        path_length_random: l_rand,
        sigma,
        path_samples: params.path_samples,
        baseline_graphs: params.baseline_graphs,
        seed: params.seed,
    })
}

/// Mean shortest-path length from up to `samples` LCC sources to every
/// other LCC node. Uses every LCC node when `samples` covers it.
pub(crate) fn sampled_path_length(
    ug: &UndirectedGraph,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let lcc = ug.largest_component();
    if lcc.len() < 2 {
        return 0.0;
    }
    let sources: Vec<usize> = if samples >= lcc.len() {
        lcc.clone()
    } else {
        let mut picked: Vec<usize> = index::sample(rng, lcc.len(), samples)
            .into_iter()
            .map(|i| lcc[i])
            .collect();
        picked.sort_unstable();
        picked
    };
    let per_source: Vec<u64> = sources
        .par_iter()
        .map(|&s| {
            ug.distances_from(s)
                .iter()
                .filter(|&&d| d != u32::MAX)
                .map(|&d| d as u64)
                .sum()
        })
        .collect();
    let total: u64 = per_source.iter().sum();
    total as f64 / (sources.len() as f64 * (lcc.len() - 1) as f64)
}

/// Degree-preserving randomization by double-edge swaps that keep the graph
/// simple.
pub(crate) fn rewire(
    n: usize,
    pairs: &[(u32, u32)],
    swaps_per_edge: usize,
    rng: &mut ChaCha8Rng,
) -> UndirectedGraph {
    let mut edges = pairs.to_vec();
    let m = edges.len();
    if m < 2 {
        return UndirectedGraph::from_pairs(n, &edges);
    }
    let key = |a: u32, b: u32| if a < b { (a, b) } else { (b, a) };
    let mut present: HashSet<(u32, u32)> = edges.iter().map(|&(a, b)| key(a, b)).collect();
    for _ in 0..swaps_per_edge * m {
        let i = rng.gen_range(0..m);
        let j = rng.gen_range(0..m);
        if i == j {
            continue;
        }
        let (a, b) = edges[i];
        let (mut c, mut d) = edges[j];
        if rng.gen::<bool>() {
            std::mem::swap(&mut c, &mut d);
        }
        // (a,b),(c,d) -> (a,d),(c,b)
        if a == d || c == b || a == c || b == d {
            continue;
        }
        let (e1, e2) = (key(a, d), key(c, b));
        if present.contains(&e1) || present.contains(&e2) {
            continue;
        }
        present.remove(&key(a, b));
        present.remove(&key(c, d));
        present.insert(e1);
        present.insert(e2);
        edges[i] = e1;
        edges[j] = e2;
    }
    UndirectedGraph::from_pairs(n, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EdgeKind, GraphBuilder, NodeKind};

    fn undirected(n: usize, pairs: &[(usize, usize)]) -> DependencyGraph {
        let mut b = GraphBuilder::synthetic();
        for i in 0..n {
            b.add_node(&format!("t:{i}"), NodeKind::Artifact, None)
                .unwrap();
        }
        for &(s, d) in pairs {
            b.add_edge_by_index(s, d, EdgeKind::Dependency).unwrap();
        }
        b.finalize()
    }

    fn ring_lattice(n: usize, k: usize) -> Vec<(usize, usize)> {
        (0..n)
            .flat_map(|i| (1..=k / 2).map(move |j| (i, (i + j) % n)))
            .collect()
    }

    #[test]
    fn complete_graph() {
        let pairs: Vec<_> = (0..5)
            .flat_map(|a| (a + 1..5).map(move |b| (a, b)))
            .collect();
        let s = small_world(&undirected(5, &pairs), SmallWorldParams::default()).unwrap();
        assert_eq!(s.clustering, 1.0);
        assert_eq!(s.path_length, 1.0);
        // nothing to rewire in a complete graph
        assert_eq!(s.sigma, Some(1.0));
    }

    #[test]
    fn ring_lattice_closed_forms() {
        let (n, k) = (100, 4);
        let g = undirected(n, &ring_lattice(n, k));
        let params = SmallWorldParams {
            path_samples: n,
            baseline_graphs: 1,
            ..Default::default()
        };
        let s = small_world(&g, params).unwrap();
        // 3(k-2) / 4(k-1)
        assert!((s.clustering - 0.5).abs() < 1e-12);
        // ring distance r needs ceil(r / (k/2)) hops
        let half = k / 2;
        let hops: usize = (1..n).map(|i| i.min(n - i).div_ceil(half)).sum();
        let expected = hops as f64 / (n - 1) as f64;
        assert!((s.path_length - expected).abs() < 1e-12);
    }

    #[test]
    fn rewiring_preserves_degrees_and_simplicity() {
        let pairs: Vec<(u32, u32)> = ring_lattice(60, 6)
            .into_iter()
            .map(|(a, b)| (a as u32, b as u32))
            .collect();
        let before = UndirectedGraph::from_pairs(60, &pairs);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let after = rewire(60, &pairs, 10, &mut rng);
        assert_eq!(after.edge_count(), before.edge_count());
        for v in 0..60 {
            assert_eq!(after.degree(v), before.degree(v));
            assert!(!after.neighbors(v).contains(&(v as u32)));
        }
        assert_ne!(after, before);
    }

    #[test]
    fn deterministic_given_seed() {
        let g = undirected(40, &ring_lattice(40, 4));
        let p = SmallWorldParams {
            path_samples: 10,
            baseline_graphs: 2,
            swaps_per_edge: 5,
            seed: 11,
        };
        assert_eq!(small_world(&g, p).unwrap(), small_world(&g, p).unwrap());
    }

    #[test]
    fn too_small() {
        let g = undirected(3, &[(0, 1)]);
        assert!(matches!(
            small_world(&g, SmallWorldParams::default()),
            Err(Error::GraphTooSmall { .. })
        ));
    }
}
