//! Brandes betweenness on unweighted directed shortest paths.
//!
//! Sources are split into a fixed number of chunks that is independent of
//! the worker count. Each chunk accumulates into its own vector and the
//! partial vectors are summed in chunk order, so results are bit-identical
//! for any thread count.

use std::collections::VecDeque;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::ScoreMap;
use crate::error::{Error, Result};
use crate::graph::DependencyGraph;

const MAX_CHUNKS: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Betweenness {
    /// Σ_{s≠v≠t} σ_st(v)/σ_st.
    pub raw: ScoreMap,
    /// `raw` divided by (|V|-1)(|V|-2); zero when |V| < 3.
    pub normalized: ScoreMap,
    /// Number of BFS sources used.
    pub sources: usize,
}

pub fn betweenness_exact(graph: &DependencyGraph) -> Betweenness {
    let sources: Vec<usize> = (0..graph.node_count()).collect();
    let raw = accumulate(graph, &sources);
    finish(graph, raw, sources.len(), json!({ "mode": "exact" }))
}

/// Pivot-sampling estimate: Brandes accumulation from `pivots` sources drawn
/// uniformly without replacement, scaled by |V| / pivots.
pub fn betweenness_sampled(
    graph: &DependencyGraph,
    pivots: usize,
    seed: u64,
) -> Result<Betweenness> {
    let n = graph.node_count();
    if pivots == 0 || pivots > n {
        return Err(Error::InvalidParameter(format!(
            "pivots must be in 1..={n}, got {pivots}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sources = index::sample(&mut rng, n, pivots).into_vec();
    sources.sort_unstable();
    let mut raw = accumulate(graph, &sources);
    let scale = n as f64 / pivots as f64;
    for x in &mut raw {
        *x *= scale;
    }
    Ok(finish(
        graph,
        raw,
        pivots,
        json!({ "mode": "sampled", "pivots": pivots, "seed": seed }),
    ))
}

fn finish(
    graph: &DependencyGraph,
    raw: Vec<f64>,
    sources: usize,
    params: serde_json::Value,
) -> Betweenness {
    let n = graph.node_count();
    let norm = if n > 2 {
        1.0 / ((n - 1) as f64 * (n - 2) as f64)
    } else {
        0.0
    };
    let normalized = raw.iter().map(|&x| x * norm).collect();
    Betweenness {
        raw: ScoreMap::new("betweenness", params.clone(), raw),
        normalized: ScoreMap::new("betweenness_normalized", params, normalized),
        sources,
    }
}

fn accumulate(graph: &DependencyGraph, sources: &[usize]) -> Vec<f64> {
    let n = graph.node_count();
    if n == 0 || sources.is_empty() {
        return vec![0.0; n];
    }
    let chunks = sources.len().min(MAX_CHUNKS);
    let per_chunk = sources.len().div_ceil(chunks);
    let partials: Vec<Vec<f64>> = sources
        .par_chunks(per_chunk)
        .map(|chunk| {
            let mut ws = Workspace::new(n);
            let mut acc = vec![0.0; n];
            for &s in chunk {
                ws.single_source(graph, s, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; n];
    for p in &partials {
        for (t, x) in total.iter_mut().zip(p) {
            *t += x;
        }
    }
    total
}

struct Workspace {
    dist: Vec<u32>,
    sigma: Vec<f64>,
    delta: Vec<f64>,
    order: Vec<u32>,
    queue: VecDeque<u32>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Workspace {
            dist: vec![u32::MAX; n],
            sigma: vec![0.0; n],
            delta: vec![0.0; n],
            order: Vec::new(),
            queue: VecDeque::new(),
        }
    }

    fn single_source(&mut self, graph: &DependencyGraph, s: usize, acc: &mut [f64]) {
        self.dist[s] = 0;
        self.sigma[s] = 1.0;
        self.queue.push_back(s as u32);
        while let Some(v) = self.queue.pop_front() {
            self.order.push(v);
            let v = v as usize;
            let dv = self.dist[v];
            for &w in graph.out_neighbors(v) {
                let w = w as usize;
                if self.dist[w] == u32::MAX {
                    self.dist[w] = dv + 1;
                    self.queue.push_back(w as u32);
                }
                if self.dist[w] == dv + 1 {
                    self.sigma[w] += self.sigma[v];
                }
            }
        }
        // Reverse BFS order; predecessors are in-neighbors one level closer.
        for &w in self.order.iter().rev() {
            let w = w as usize;
            let dw = self.dist[w];
            if dw == 0 {
                continue;
            }
            let coeff = (1.0 + self.delta[w]) / self.sigma[w];
            for &v in graph.in_neighbors(w) {
                let v = v as usize;
                if self.dist[v] != u32::MAX && self.dist[v] + 1 == dw {
                    self.delta[v] += self.sigma[v] * coeff;
                }
            }
            acc[w] += self.delta[w];
        }
        for &v in &self.order {
            let v = v as usize;
            self.dist[v] = u32::MAX;
            self.sigma[v] = 0.0;
            self.delta[v] = 0.0;
        }
        self.order.clear();
    }
}
