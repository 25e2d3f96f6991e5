use rayon::prelude::*;

use crate::graph::DependencyGraph;

/// Simple undirected projection: edge directions dropped, reciprocal
/// pairs merged, neighbor lists sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedGraph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl UndirectedGraph {
    pub fn from_directed(graph: &DependencyGraph) -> Self {
        let n = graph.node_count();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        let mut row: Vec<u32> = Vec::new();
        for v in 0..n {
            row.clear();
            row.extend_from_slice(graph.out_neighbors(v));
            row.extend_from_slice(graph.in_neighbors(v));
            row.sort_unstable();
            row.dedup();
            targets.extend_from_slice(&row);
            offsets.push(targets.len());
        }
        UndirectedGraph { offsets, targets }
    }

    /// Builds from undirected pairs; self-pairs and repeats are dropped.
    pub fn from_pairs(n: usize, pairs: &[(u32, u32)]) -> Self {
        let mut rows: Vec<Vec<u32>> = vec![Vec::new(); n];
        for &(a, b) in pairs {
            if a != b {
                rows[a as usize].push(b);
                rows[b as usize].push(a);
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for mut row in rows {
            row.sort_unstable();
            row.dedup();
            targets.extend_from_slice(&row);
            offsets.push(targets.len());
        }
        UndirectedGraph { offsets, targets }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Each edge once, as (smaller, larger).
    pub fn pairs(&self) -> Vec<(u32, u32)> {
        (0..self.node_count())
            .flat_map(|v| {
                self.neighbors(v)
                    .iter()
                    .filter(move |&&w| (w as usize) > v)
                    .map(move |&w| (v as u32, w))
            })
            .collect()
    }

    /// Triangles through each node, by degree-ordered forward enumeration.
    pub fn triangle_counts(&self) -> Vec<u64> {
        let n = self.node_count();
        let rank_less = |a: usize, b: usize| (self.degree(a), a) < (self.degree(b), b);
        // forward[v]: neighbors ranked above v
        let forward: Vec<Vec<u32>> = (0..n)
            .into_par_iter()
            .map(|v| {
                self.neighbors(v)
                    .iter()
                    .copied()
                    .filter(|&w| rank_less(v, w as usize))
                    .collect()
            })
            .collect();
        (0..n)
            .into_par_iter()
            .fold(
                || (vec![0u64; n], vec![false; n]),
                |(mut tri, mut mark), v| {
                    for &u in &forward[v] {
                        mark[u as usize] = true;
                    }
                    for &u in &forward[v] {
                        for &w in &forward[u as usize] {
                            if mark[w as usize] {
                                tri[v] += 1;
                                tri[u as usize] += 1;
                                tri[w as usize] += 1;
                            }
                        }
                    }
                    for &u in &forward[v] {
                        mark[u as usize] = false;
                    }
                    (tri, mark)
                },
            )
            .map(|(tri, _)| tri)
            .reduce(
                || vec![0u64; n],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    a
                },
            )
    }

    /// Local clustering coefficient per node; zero below degree 2.
    pub fn local_clustering(&self) -> Vec<f64> {
        let tri = self.triangle_counts();
        (0..self.node_count())
            .map(|v| {
                let d = self.degree(v) as f64;
                if d < 2.0 {
                    0.0
                } else {
                    2.0 * tri[v] as f64 / (d * (d - 1.0))
                }
            })
            .collect()
    }

    pub fn mean_clustering(&self) -> f64 {
        let n = self.node_count();
        if n == 0 {
            return 0.0;
        }
        self.local_clustering().iter().sum::<f64>() / n as f64
    }

    /// BFS hop distances from `s`; `u32::MAX` marks unreachable nodes.
    pub fn distances_from(&self, s: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.node_count()];
        let mut queue = std::collections::VecDeque::from([s]);
        dist[s] = 0;
        while let Some(v) = queue.pop_front() {
            for &w in self.neighbors(v) {
                let w = w as usize;
                if dist[w] == u32::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Nodes of the largest connected component, ascending. Ties go to the
    /// component containing the smallest node index.
    pub fn largest_component(&self) -> Vec<usize> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut best: Vec<usize> = Vec::new();
        for root in 0..n {
            if seen[root] {
                continue;
            }
            let mut comp = vec![root];
            seen[root] = true;
            let mut i = 0;
            while i < comp.len() {
                let v = comp[i];
                i += 1;
                for &w in self.neighbors(v) {
                    if !seen[w as usize] {
                        seen[w as usize] = true;
                        comp.push(w as usize);
                    }
                }
            }
            if comp.len() > best.len() {
                best = comp;
            }
        }
        best.sort_unstable();
        best
    }
}
