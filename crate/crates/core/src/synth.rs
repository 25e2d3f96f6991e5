//! Seeded synthetic graph generators used as validation oracles.
//!
//! Nodes are named `synth:node:<i>`, all of kind artifact, and every edge is
//! a dependency edge; the graphs are built with a synthetic builder so the
//! artifact/release endpoint rule does not apply.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DependencyGraph, EdgeKind, GraphBuilder, NodeKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// Barabási–Albert growth: each new node attaches `m` edges to distinct
    /// existing nodes chosen proportionally to degree.
    PreferentialAttachment { n: usize, m: usize },
    /// G(n, p): every ordered pair (or unordered pair, when bidirected)
    /// independently with probability `p`.
    UniformRandom { n: usize, p: f64 },
    /// Watts–Strogatz: ring lattice with `k` neighbors per node, each edge's
    /// far end rewired with probability `beta`.
    RewiredLattice { n: usize, k: usize, beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// One directed edge per generated link (newer -> older for attachment,
    /// lattice owner -> neighbor).
    #[default]
    Directed,
    /// Each generated link becomes a pair of opposite directed edges.
    Bidirected,
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::Directed => "directed",
            Orientation::Bidirected => "bidirected",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: Family,
    pub seed: u64,
    pub orientation: Orientation,
}

impl GeneratorSpec {
    pub fn new(family: Family, seed: u64) -> Self {
        GeneratorSpec {
            family,
            seed,
            orientation: Orientation::Directed,
        }
    }

    pub fn bidirected(mut self) -> Self {
        self.orientation = Orientation::Bidirected;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        match self.family {
            Family::PreferentialAttachment { n, m } => {
                if m == 0 {
                    return bad("m must be >= 1".into());
                }
                if n < (m + 1).max(2) {
                    return bad(format!(
                        "n = {n} must be >= max(m+1, 2) = {}",
                        (m + 1).max(2)
                    ));
                }
            }
            Family::UniformRandom { n, p } => {
                if n < 2 {
                    return bad(format!("n = {n} must be >= 2"));
                }
                if !(0.0..=1.0).contains(&p) {
                    return bad(format!("p = {p} not in [0, 1]"));
                }
            }
            Family::RewiredLattice { n, k, beta } => {
                if k == 0 || k % 2 != 0 {
                    return bad(format!("k = {k} must be even and positive"));
                }
                if n < (k + 1).max(2) {
                    return bad(format!("n = {n} must be >= k+1 = {}", k + 1));
                }
                if !(0.0..=1.0).contains(&beta) {
                    return bad(format!("beta = {beta} not in [0, 1]"));
                }
            }
        }
        Ok(())
    }
}

pub fn node_name(i: usize) -> String {
    format!("synth:node:{i}")
}

pub fn generate(spec: &GeneratorSpec) -> Result<DependencyGraph> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (n, links) = match spec.family {
        Family::PreferentialAttachment { n, m } => (n, preferential_attachment(n, m, &mut rng)),
        Family::UniformRandom { n, p } => (n, uniform_random(n, p, spec.orientation, &mut rng)),
        Family::RewiredLattice { n, k, beta } => (n, rewired_lattice(n, k, beta, &mut rng)),
    };
    let mut b = GraphBuilder::synthetic();
    for i in 0..n {
        b.add_node(&node_name(i), NodeKind::Artifact, None)?;
    }
    for (s, d) in links {
        b.add_edge_by_index(s, d, EdgeKind::Dependency)?;
        if spec.orientation == Orientation::Bidirected {
            b.add_edge_by_index(d, s, EdgeKind::Dependency)?;
        }
    }
    Ok(b.finalize())
}

/// Links from the seed clique on nodes 0..=m (i -> j for j < i), then one
/// node at a time with m links to distinct earlier nodes. Targets are drawn
/// from an urn holding every link endpoint, so the edge count is
/// m(m+1)/2 + m(n-m-1).
fn preferential_attachment(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut links = Vec::with_capacity(m * n);
    let mut urn: Vec<usize> = Vec::with_capacity(2 * m * n);
    for i in 0..=m {
        for j in 0..i {
            links.push((i, j));
            urn.push(i);
            urn.push(j);
        }
    }
    let mut chosen: Vec<usize> = Vec::with_capacity(m);
    for i in (m + 1)..n {
        chosen.clear();
        while chosen.len() < m {
            let t = urn[rng.gen_range(0..urn.len())];
            if !chosen.contains(&t) {
                chosen.push(t);
            }
        }
        for &t in &chosen {
            links.push((i, t));
            urn.push(i);
            urn.push(t);
        }
    }
    links
}

/// Geometric skipping over the pair index space.
fn uniform_random(
    n: usize,
    p: f64,
    orientation: Orientation,
    rng: &mut ChaCha8Rng,
) -> Vec<(usize, usize)> {
    let mut links = Vec::new();
    if p <= 0.0 {
        return links;
    }
    let directed = orientation == Orientation::Directed;
    let total: u64 = if directed {
        n as u64 * (n as u64 - 1)
    } else {
        n as u64 * (n as u64 - 1) / 2
    };
    let decode = |idx: u64| -> (usize, usize) {
        if directed {
            let s = idx / (n as u64 - 1);
            let r = idx % (n as u64 - 1);
            let t = if r < s { r } else { r + 1 };
            (s as usize, t as usize)
        } else {
            // row v holds pairs (v, 0..v); row v starts at v(v-1)/2
            let mut v = (((8 * idx + 1) as f64).sqrt() as u64).div_ceil(2);
            while v * (v - 1) / 2 > idx {
                v -= 1;
            }
            while (v + 1) * v / 2 <= idx {
                v += 1;
            }
            (v as usize, (idx - v * (v - 1) / 2) as usize)
        }
    };
    if p >= 1.0 {
        return (0..total).map(decode).collect();
    }
    let log_q = (1.0 - p).ln();
    let mut idx: i128 = -1;
    loop {
        let u: f64 = rng.gen();
        let skip = ((1.0 - u).ln() / log_q).floor();
        idx += 1 + skip as i128;
        if idx >= total as i128 {
            break;
        }
        links.push(decode(idx as u64));
    }
    links
}

fn rewired_lattice(n: usize, k: usize, beta: f64, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    // owner -> neighbor, in construction order
    let mut links: Vec<(usize, usize)> = Vec::with_capacity(n * k / 2);
    for j in 1..=k / 2 {
        for i in 0..n {
            let t = (i + j) % n;
            adj[i].insert(t);
            adj[t].insert(i);
            links.push((i, t));
        }
    }
    if beta > 0.0 {
        for link in links.iter_mut() {
            if rng.gen::<f64>() >= beta {
                continue;
            }
            let (u, v) = *link;
            if adj[u].len() >= n - 1 {
                continue;
            }
            let w = loop {
                let w = rng.gen_range(0..n);
                if w != u && !adj[u].contains(&w) {
                    break w;
                }
            };
            adj[u].remove(&v);
            adj[v].remove(&u);
            adj[u].insert(w);
            adj[w].insert(u);
            *link = (u, w);
        }
    }
    links
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::UndirectedGraph;

    #[test]
    fn attachment_edge_count() {
        let g = generate(&GeneratorSpec::new(
            Family::PreferentialAttachment { n: 100, m: 2 },
            7,
        ))
        .unwrap();
        assert_eq!(g.node_count(), 100);
        assert_eq!(g.edge_count(), 2 * (100 - 2 - 1) + 3);
        // every node past the seed clique has exactly m out-links
        for v in 3..100 {
            assert_eq!(g.out_degree(v), 2);
        }
        assert_eq!(g.id(5), "synth:node:5");
    }

    #[test]
    fn attachment_with_m_one() {
        let g = generate(&GeneratorSpec::new(
            Family::PreferentialAttachment { n: 50, m: 1 },
            1,
        ))
        .unwrap();
        assert_eq!(g.edge_count(), 49);
    }

    #[test]
    fn empty_random_graph() {
        let g = generate(&GeneratorSpec::new(
            Family::UniformRandom { n: 50, p: 0.0 },
            3,
        ))
        .unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (50, 0));
    }

    #[test]
    fn full_random_graph() {
        let g = generate(&GeneratorSpec::new(
            Family::UniformRandom { n: 12, p: 1.0 },
            3,
        ))
        .unwrap();
        assert_eq!(g.edge_count(), 12 * 11);
        let g =
            generate(&GeneratorSpec::new(Family::UniformRandom { n: 12, p: 1.0 }, 3).bidirected())
                .unwrap();
        assert_eq!(g.edge_count(), 12 * 11);
    }

    #[test]
    fn random_edge_count_within_three_sigma() {
        let (n, p) = (300usize, 0.03);
        let pairs = (n * (n - 1)) as f64;
        let mean = pairs * p;
        let sd = (pairs * p * (1.0 - p)).sqrt();
        for seed in 0..10 {
            let g = generate(&GeneratorSpec::new(Family::UniformRandom { n, p }, seed)).unwrap();
            assert!(
                (g.edge_count() as f64 - mean).abs() < 3.0 * sd,
                "seed {seed}"
            );
        }
    }

    #[test]
    fn unordered_pair_decoding_covers_all_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut links = uniform_random(9, 1.0, Orientation::Bidirected, &mut rng);
        links.sort_unstable();
        let want: Vec<_> = (0..9).flat_map(|v| (0..v).map(move |w| (v, w))).collect();
        let mut want = want;
        want.sort_unstable();
        assert_eq!(links, want);
    }

    #[test]
    fn ring_lattice_without_rewiring() {
        let g = generate(&GeneratorSpec::new(
            Family::RewiredLattice {
                n: 20,
                k: 4,
                beta: 0.0,
            },
            0,
        ))
        .unwrap();
        for v in 0..20 {
            assert_eq!(g.in_degree(v) + g.out_degree(v), 4);
        }
        let ug = UndirectedGraph::from_directed(&g);
        assert!((ug.mean_clustering() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rewiring_keeps_edge_count() {
        let g = generate(&GeneratorSpec::new(
            Family::RewiredLattice {
                n: 200,
                k: 6,
                beta: 0.3,
            },
            5,
        ))
        .unwrap();
        assert_eq!(g.edge_count(), 600);
    }

    #[test]
    fn reproducible() {
        for family in [
            Family::PreferentialAttachment { n: 300, m: 3 },
            Family::UniformRandom { n: 100, p: 0.05 },
            Family::RewiredLattice {
                n: 100,
                k: 4,
                beta: 0.2,
            },
        ] {
            let spec = GeneratorSpec::new(family, 21);
            assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        }
    }

    #[test]
    fn invalid_specs() {
        let bad = [
            Family::PreferentialAttachment { n: 2, m: 2 },
            Family::PreferentialAttachment { n: 10, m: 0 },
            Family::UniformRandom { n: 10, p: 1.5 },
            Family::RewiredLattice {
                n: 10,
                k: 3,
                beta: 0.1,
            },
            Family::RewiredLattice {
                n: 4,
                k: 4,
                beta: 0.1,
            },
            Family::RewiredLattice {
                n: 10,
                k: 4,
                beta: -0.1,
            },
        ];
        for family in bad {
            assert!(matches!(
                generate(&GeneratorSpec::new(family, 0)),
                Err(Error::InvalidSpec(_))
            ));
        }
    }
}
