//! Shared fixtures and brute-force oracles for the integration suites.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::{BTreeSet, VecDeque};
use std::path::PathBuf;

use dgm_core::ingest::{self, Direction, SampleSpec};
use dgm_core::synth::{self, Family, GeneratorSpec};
use dgm_core::DependencyGraph;
use serde::Deserialize;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(rel)
}

pub fn er(n: usize, p: f64, seed: u64) -> DependencyGraph {
    synth::generate(&GeneratorSpec::new(Family::UniformRandom { n, p }, seed)).unwrap()
}

/// Hop distances from `s` along out-edges.
fn bfs(g: &DependencyGraph, s: usize) -> Vec<usize> {
    let mut d = vec![usize::MAX; g.node_count()];
    d[s] = 0;
    let mut q = VecDeque::from([s]);
    while let Some(v) = q.pop_front() {
        for &w in g.out_neighbors(v) {
            let w = w as usize;
            if d[w] == usize::MAX {
                d[w] = d[v] + 1;
                q.push_back(w);
            }
        }
    }
    d
}

/// Shortest-path counts from `s`, filled layer by layer from the distance table.
fn path_counts(g: &DependencyGraph, dist: &[usize], s: usize) -> Vec<f64> {
    let n = g.node_count();
    let mut sigma = vec![0.0; n];
    sigma[s] = 1.0;
    let mut order: Vec<usize> = (0..n).filter(|&v| dist[v] != usize::MAX).collect();
    order.sort_by_key(|&v| dist[v]);
    for &v in &order {
        for &w in g.out_neighbors(v) {
            let w = w as usize;
            if dist[w] == dist[v] + 1 {
                sigma[w] += sigma[v];
            }
        }
    }
    sigma
}

/// Σ_{s≠v≠t} σ_st(v)/σ_st with σ_st(v) = σ_sv·σ_vt whenever v lies on a
/// shortest s-t path, enumerated over every (s, t, v) triple.
pub fn brute_betweenness(g: &DependencyGraph) -> Vec<f64> {
    let n = g.node_count();
    let dist: Vec<Vec<usize>> = (0..n).map(|s| bfs(g, s)).collect();
    let sigma: Vec<Vec<f64>> = (0..n).map(|s| path_counts(g, &dist[s], s)).collect();
    let mut bc = vec![0.0; n];
    for s in 0..n {
        for t in 0..n {
            if s == t || dist[s][t] == usize::MAX {
                continue;
            }
            for v in 0..n {
                if v == s || v == t {
                    continue;
                }
                let (a, b) = (dist[s][v], dist[v][t]);
                if a != usize::MAX && b != usize::MAX && a + b == dist[s][t] {
                    bc[v] += sigma[s][v] * sigma[v][t] / sigma[s][t];
                }
            }
        }
    }
    bc
}

/// Dense power iteration on the full Google matrix, dangling rows uniform.
pub fn dense_pagerank(g: &DependencyGraph, alpha: f64, tol: f64) -> Vec<f64> {
    let n = g.node_count();
    let nf = n as f64;
    let mut m = vec![vec![0.0; n]; n];
    for u in 0..n {
        let outs = g.out_neighbors(u);
        for v in 0..n {
            let link = if outs.is_empty() {
                1.0 / nf
            } else if outs.contains(&(v as u32)) {
                1.0 / outs.len() as f64
            } else {
                0.0
            };
            m[u][v] = alpha * link + (1.0 - alpha) / nf;
        }
    }
    let mut x = vec![1.0 / nf; n];
    for _ in 0..10_000 {
        let mut y = vec![0.0; n];
        for u in 0..n {
            for v in 0..n {
                y[v] += x[u] * m[u][v];
            }
        }
        let delta: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum();
        x = y;
        if delta < tol {
            break;
        }
    }
    x
}

fn reach_matrix(g: &DependencyGraph, undirected: bool) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut adj = vec![vec![false; n]; n];
    for (s, d, _) in g.edges() {
        adj[s][d] = true;
        if undirected {
            adj[d][s] = true;
        }
    }
    for i in 0..n {
        adj[i][i] = true;
    }
    // Warshall transitive closure
    for k in 0..n {
        for i in 0..n {
            if adj[i][k] {
                for j in 0..n {
                    if adj[k][j] {
                        adj[i][j] = true;
                    }
                }
            }
        }
    }
    adj
}

/// Partition of nodes into blocks, as a set of sorted member lists.
pub type Partition = BTreeSet<Vec<usize>>;

fn partition(n: usize, same: impl Fn(usize, usize) -> bool) -> Partition {
    let mut out = BTreeSet::new();
    for v in 0..n {
        out.insert((0..n).filter(|&w| same(v, w)).collect());
    }
    out
}

pub fn closure_wcc(g: &DependencyGraph) -> Partition {
    let r = reach_matrix(g, true);
    partition(g.node_count(), |a, b| r[a][b])
}

pub fn closure_scc(g: &DependencyGraph) -> Partition {
    let r = reach_matrix(g, false);
    partition(g.node_count(), |a, b| r[a][b] && r[b][a])
}

pub fn labels_to_partition(labels: &[u32]) -> Partition {
    let k = labels.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    let mut blocks = vec![Vec::new(); k];
    for (v, &c) in labels.iter().enumerate() {
        blocks[c as usize].push(v);
    }
    blocks.into_iter().filter(|b| !b.is_empty()).collect()
}

#[derive(Deserialize)]
pub struct SampleFixture {
    pub k: usize,
    pub seeds: Vec<String>,
    pub cases: Vec<SampleCase>,
}

#[derive(Deserialize)]
pub struct SampleCase {
    pub direction: Direction,
    pub depth: usize,
    pub nodes: Vec<String>,
    pub edges: Vec<(String, String)>,
}

/// Checks every hand-enumerated case of the 12-node fixture. Returns the
/// number of cases checked.
pub fn check_sample_fixture() -> Result<usize, String> {
    let dir = fixture("sample12");
    let (g, report) = ingest::load_csv(&dir.join("nodes.csv"), &dir.join("edges.csv"))
        .map_err(|e| e.to_string())?;
    if report.skipped_rows() != 0 {
        return Err(format!("fixture rows skipped: {report:?}"));
    }
    let expected: SampleFixture =
        serde_json::from_slice(&std::fs::read(dir.join("expected.json")).unwrap())
            .map_err(|e| e.to_string())?;
    let seeds = ingest::select_top_seeds(&g, expected.k);
    let seed_ids: Vec<&str> = seeds.seeds.iter().map(|s| s.id.as_str()).collect();
    if seed_ids != expected.seeds {
        return Err(format!("seeds {seed_ids:?}, expected {:?}", expected.seeds));
    }
    for case in &expected.cases {
        let spec = SampleSpec {
            k: expected.k,
            depth: case.depth,
            direction: case.direction,
        };
        let s = ingest::bfs_sample(&g, &seeds, &spec).map_err(|e| e.to_string())?;
        let nodes: BTreeSet<String> = (0..s.node_count()).map(|v| s.id(v).to_string()).collect();
        let want_nodes: BTreeSet<String> = case.nodes.iter().cloned().collect();
        let edges: BTreeSet<(String, String)> = s
            .edges()
            .map(|(a, b, _)| (s.id(a).to_string(), s.id(b).to_string()))
            .collect();
        let want_edges: BTreeSet<(String, String)> = case.edges.iter().cloned().collect();
        if nodes != want_nodes || edges != want_edges {
            return Err(format!(
                "{} depth {}: got nodes {nodes:?} edges {edges:?}",
                case.direction, case.depth
            ));
        }
    }
    Ok(expected.cases.len())
}

/// Samples at depth d+1 contain samples at depth d, on random graphs with
/// random seed sets. Returns the number of graphs checked.
pub fn check_depth_monotonicity(graphs: usize) -> Result<usize, String> {
    for i in 0..graphs {
        let g = er(60 + 5 * i, 0.03, 1000 + i as u64);
        let seeds = ingest::select_top_seeds(&g, 1 + i % 4);
        for direction in [Direction::Forward, Direction::Reverse, Direction::Both] {
            let mut prev: BTreeSet<String> = BTreeSet::new();
            for depth in 1..=5 {
                let spec = SampleSpec {
                    k: seeds.len().max(1),
                    depth,
                    direction,
                };
                let s = ingest::bfs_sample(&g, &seeds, &spec).map_err(|e| e.to_string())?;
                let ids: BTreeSet<String> =
                    (0..s.node_count()).map(|v| s.id(v).to_string()).collect();
                if !prev.is_subset(&ids) {
                    return Err(format!("graph {i} {direction} depth {depth} lost nodes"));
                }
                prev = ids;
            }
        }
    }
    Ok(graphs)
}
