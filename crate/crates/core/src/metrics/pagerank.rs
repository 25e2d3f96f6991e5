use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::ScoreMap;
use crate::error::{Error, Result};
use crate::graph::DependencyGraph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PageRankParams {
    /// Damping factor, in (0, 1).
    pub alpha: f64,
    /// L1 change between successive iterates below which iteration stops.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PageRankParams {
    fn default() -> Self {
        PageRankParams {
            alpha: 0.85,
            tol: 1e-10,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageRank {
    pub scores: ScoreMap,
    pub iterations: usize,
    pub converged: bool,
    /// L1 change of the last iteration.
    pub last_delta: f64,
}

/// Power iteration for PR(v) = (1-α)/|V| + α Σ_{u→v} PR(u)/d⁺(u).
///
/// Nodes without out-edges spread their score uniformly over all nodes, so
/// the scores keep summing to one. Hitting `max_iter` is not an error; the
/// result reports `converged = false`.
pub fn pagerank(graph: &DependencyGraph, params: PageRankParams) -> Result<PageRank> {
    let PageRankParams {
        alpha,
        tol,
        max_iter,
    } = params;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha {alpha} not in (0,1)"
        )));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tol {tol} must be positive"
        )));
    }
    let n = graph.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let nf = n as f64;
    let out_deg: Vec<usize> = (0..n).map(|v| graph.out_degree(v)).collect();
    let dangling: Vec<usize> = (0..n).filter(|&v| out_deg[v] == 0).collect();

    let mut rank = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut contrib = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;
    let mut last_delta = f64::INFINITY;

    while iterations < max_iter {
        iterations += 1;
        let dangling_mass: f64 = dangling.iter().map(|&v| rank[v]).sum();
        let base = (1.0 - alpha) / nf + alpha * dangling_mass / nf;
        contrib.par_iter_mut().enumerate().for_each(|(u, c)| {
            *c = if out_deg[u] > 0 {
                rank[u] / out_deg[u] as f64
            } else {
                0.0
            }
        });
        next.par_iter_mut().enumerate().for_each(|(v, x)| {
            let inflow: f64 = graph
                .in_neighbors(v)
                .iter()
                .map(|&u| contrib[u as usize])
                .sum();
            *x = base + alpha * inflow;
        });
        last_delta = next.iter().zip(&rank).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rank, &mut next);
        if last_delta < tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("pagerank did not converge in {max_iter} iterations (delta {last_delta:e})");
    }

    Ok(PageRank {
        scores: ScoreMap::new(
            "pagerank",
            json!({ "alpha": alpha, "tol": tol, "max_iter": max_iter }),
            rank,
        ),
        iterations,
        converged,
        last_delta,
    })
}
