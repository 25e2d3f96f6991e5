//! Node-removal experiments: how the weak LCC shrinks as nodes are deleted
//! at random or in order of a centrality ranking.
//!
//! Rankings are computed once on the intact graph. Nodes are removed in
//! batches of ⌈step·|V|⌉ and the weak LCC of the survivors is recorded
//! after each batch. All batch sizes of one run are answered by a single
//! reverse union-find sweep that re-inserts nodes from last removed to first.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DependencyGraph, EdgeKind, NodeKind};
use crate::metrics::{betweenness_exact, betweenness_sampled, pagerank, PageRankParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum RemovalPolicy {
    Random { seed: u64 },
    TargetedDegree,
    TargetedPageRank,
    TargetedBetweenness,
}

impl RemovalPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            RemovalPolicy::Random { .. } => "random",
            RemovalPolicy::TargetedDegree => "degree",
            RemovalPolicy::TargetedPageRank => "pagerank",
            RemovalPolicy::TargetedBetweenness => "betweenness",
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(self, RemovalPolicy::Random { .. })
    }
}

impl fmt::Display for RemovalPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RemovalPolicy {
    type Err = String;

    /// `random` takes seed 0; callers override it.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Ok(RemovalPolicy::Random { seed: 0 }),
            "degree" => Ok(RemovalPolicy::TargetedDegree),
            "pagerank" => Ok(RemovalPolicy::TargetedPageRank),
            "betweenness" => Ok(RemovalPolicy::TargetedBetweenness),
            other => Err(format!("unknown removal policy {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct ResilienceOptions {
    /// Removing an artifact also removes its releases (versioning targets).
    pub cascade_releases: bool,
    /// Use pivot-sampled betweenness with this many pivots for the
    /// betweenness ranking instead of the exact scores.
    pub betweenness_pivots: Option<usize>,
    pub pivot_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub fraction_removed: f64,
    pub lcc_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResilienceCurve {
    pub policy: RemovalPolicy,
    pub max_fraction: f64,
    pub step: f64,
    pub batch_size: usize,
    pub points: Vec<CurvePoint>,
}

impl ResilienceCurve {
    /// Trapezoidal area under lcc_fraction over fraction_removed.
    pub fn auc(&self) -> f64 {
        auc(&self.points)
    }
}

pub fn auc(points: &[CurvePoint]) -> f64 {
    points
        .windows(2)
        .map(|w| {
            (w[1].fraction_removed - w[0].fraction_removed)
                * (w[0].lcc_fraction + w[1].lcc_fraction)
                / 2.0
        })
        .sum()
}

fn validate(max_fraction: f64, step: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&max_fraction) {
        return Err(Error::InvalidFraction(format!(
            "max_fraction {max_fraction} not in [0, 1]"
        )));
    }
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidFraction(format!("step {step} not in (0, 1]")));
    }
    if max_fraction > 0.0 && step > max_fraction {
        return Err(Error::InvalidFraction(format!(
            "step {step} exceeds max_fraction {max_fraction}"
        )));
    }
    Ok(())
}

/// Nodes in removal order.
pub fn removal_order(
    graph: &DependencyGraph,
    policy: RemovalPolicy,
    opts: &ResilienceOptions,
) -> Result<Vec<usize>> {
    let n = graph.node_count();
    let mut order: Vec<usize> = (0..n).collect();
    let scores: Vec<f64> = match policy {
        RemovalPolicy::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            order.shuffle(&mut rng);
            return Ok(order);
        }
        RemovalPolicy::TargetedDegree => (0..n)
            .map(|v| (graph.in_degree(v) + graph.out_degree(v)) as f64)
            .collect(),
        RemovalPolicy::TargetedPageRank => {
            pagerank(graph, PageRankParams::default())?.scores.scores
        }
        RemovalPolicy::TargetedBetweenness => match opts.betweenness_pivots {
            Some(p) => {
                betweenness_sampled(graph, p.min(n), opts.pivot_seed)?
                    .raw
                    .scores
            }
            None => betweenness_exact(graph).raw.scores,
        },
    };
    order.sort_by(|&a, &b| {
        scores[b]
            .total_cmp(&scores[a])
            .then_with(|| graph.id(a).cmp(graph.id(b)))
    });
    Ok(order)
}

pub fn removal_experiment(
    graph: &DependencyGraph,
    policy: RemovalPolicy,
    max_fraction: f64,
    step: f64,
) -> Result<ResilienceCurve> {
    removal_experiment_with(
        graph,
        policy,
        max_fraction,
        step,
        &ResilienceOptions::default(),
    )
}

pub fn removal_experiment_with(
    graph: &DependencyGraph,
    policy: RemovalPolicy,
    max_fraction: f64,
    step: f64,
    opts: &ResilienceOptions,
) -> Result<ResilienceCurve> {
    validate(max_fraction, step)?;
    if graph.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let order = removal_order(graph, policy, opts)?;
    Ok(curve_for_order(
        graph,
        policy,
        &order,
        max_fraction,
        step,
        opts,
    ))
}

/// Removed-node counts after each batch, starting with 0.
pub fn batch_schedule(n: usize, max_fraction: f64, step: f64) -> (usize, Vec<usize>) {
    let batch = ((step * n as f64 - 1e-9).ceil() as usize).max(1);
    let limit = ((max_fraction * n as f64 + 1e-9).floor() as usize).min(n);
    let mut counts = vec![0];
    let mut removed = 0;
    while removed < limit {
        removed = (removed + batch).min(limit);
        counts.push(removed);
    }
    (batch, counts)
}

fn curve_for_order(
    graph: &DependencyGraph,
    policy: RemovalPolicy,
    order: &[usize],
    max_fraction: f64,
    step: f64,
    opts: &ResilienceOptions,
) -> ResilienceCurve {
    let n = graph.node_count();
    let (batch_size, counts) = batch_schedule(n, max_fraction, step);
    let times = removal_times(graph, order, &counts, opts.cascade_releases);
    let lcc = lcc_by_batch(graph, &times, counts.len() - 1);
    let points = counts
        .iter()
        .zip(&lcc)
        .map(|(&r, &l)| CurvePoint {
            fraction_removed: r as f64 / n as f64,
            lcc_fraction: l as f64 / n as f64,
        })
        .collect();
    ResilienceCurve {
        policy,
        max_fraction,
        step,
        batch_size,
        points,
    }
}

/// Batch index (1-based) at which each node disappears; `u32::MAX` if it
/// survives every batch.
fn removal_times(
    graph: &DependencyGraph,
    order: &[usize],
    counts: &[usize],
    cascade: bool,
) -> Vec<u32> {
    let mut time = vec![u32::MAX; graph.node_count()];
    for b in 1..counts.len() {
        for &v in &order[counts[b - 1]..counts[b]] {
            if time[v] == u32::MAX {
                time[v] = b as u32;
            }
            if cascade && graph.kind(v) == NodeKind::Artifact {
                for (r, kind) in graph.out_edges(v) {
                    if kind == EdgeKind::Versioning && time[r] == u32::MAX {
                        time[r] = b as u32;
                    }
                }
            }
        }
    }
    time
}

/// Weak LCC size after each batch 0..=batches, by re-inserting nodes in
/// reverse removal order into a union-find.
fn lcc_by_batch(graph: &DependencyGraph, time: &[u32], batches: usize) -> Vec<usize> {
    let n = graph.node_count();
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); batches + 2];
    for (v, &t) in time.iter().enumerate() {
        let slot = if t == u32::MAX {
            batches + 1
        } else {
            t as usize
        };
        buckets[slot].push(v);
    }
    let mut dsu = Dsu::new(n);
    let mut active = vec![false; n];
    let mut best = 0usize;
    let mut lcc = vec![0usize; batches + 1];
    let activate = |v: usize, dsu: &mut Dsu, active: &mut [bool], best: &mut usize| {
        active[v] = true;
        *best = (*best).max(1);
        for &w in graph.out_neighbors(v).iter().chain(graph.in_neighbors(v)) {
            if active[w as usize] {
                *best = (*best).max(dsu.union(v, w as usize));
            }
        }
    };
    // survivors of every batch
    for &v in &buckets[batches + 1] {
        activate(v, &mut dsu, &mut active, &mut best);
    }
    for b in (0..=batches).rev() {
        lcc[b] = best;
        if b >= 1 {
            for &v in &buckets[b] {
                activate(v, &mut dsu, &mut active, &mut best);
            }
        }
    }
    lcc
}

struct Dsu {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] as usize != v {
            let p = self.parent[v] as usize;
            self.parent[v] = self.parent[p];
            v = p;
        }
        v
    }

    /// Merges the sets of `a` and `b`, returning the merged size.
    fn union(&mut self, a: usize, b: usize) -> usize {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return self.size[ra] as usize;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        self.size[ra] as usize
    }
}

/// Weak LCC of the subgraph induced by nodes with `removed[v] == false`,
/// computed from scratch by BFS.
pub fn lcc_without(graph: &DependencyGraph, removed: &[bool]) -> usize {
    let n = graph.node_count();
    let mut seen = removed.to_vec();
    let mut best = 0;
    let mut stack = Vec::new();
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        stack.push(root);
        let mut size = 0;
        while let Some(v) = stack.pop() {
            size += 1;
            for &w in graph.out_neighbors(v).iter().chain(graph.in_neighbors(v)) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    stack.push(w as usize);
                }
            }
        }
        best = best.max(size);
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySummary {
    pub policy: RemovalPolicy,
    pub trials: usize,
    pub fractions: Vec<f64>,
    pub mean_lcc: Vec<f64>,
    pub std_lcc: Vec<f64>,
    pub auc_mean: f64,
    pub auc_std: f64,
    pub aucs: Vec<f64>,
}

impl PolicySummary {
    pub fn mean_curve(&self) -> Vec<CurvePoint> {
        self.fractions
            .iter()
            .zip(&self.mean_lcc)
            .map(|(&f, &l)| CurvePoint {
                fraction_removed: f,
                lcc_fraction: l,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyComparison {
    pub max_fraction: f64,
    pub step: f64,
    pub seed: u64,
    pub policies: Vec<PolicySummary>,
}

/// Runs every policy `trials` times. Random policies get a fresh seed per
/// trial derived from (`seed`, policy seed, trial index); targeted policies
/// repeat the same ranking.
pub fn compare_policies(
    graph: &DependencyGraph,
    policies: &[RemovalPolicy],
    max_fraction: f64,
    step: f64,
    trials: usize,
    seed: u64,
) -> Result<PolicyComparison> {
    compare_policies_with(
        graph,
        policies,
        max_fraction,
        step,
        trials,
        seed,
        &ResilienceOptions::default(),
    )
}

pub fn compare_policies_with(
    graph: &DependencyGraph,
    policies: &[RemovalPolicy],
    max_fraction: f64,
    step: f64,
    trials: usize,
    seed: u64,
    opts: &ResilienceOptions,
) -> Result<PolicyComparison> {
    validate(max_fraction, step)?;
    if policies.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one policy required".into(),
        ));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    if graph.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let mut summaries = Vec::with_capacity(policies.len());
    for &policy in policies {
        let fixed_order = if policy.is_random() {
            None
        } else {
            Some(removal_order(graph, policy, opts)?)
        };
        let curves: Vec<ResilienceCurve> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let p = match policy {
                    RemovalPolicy::Random { seed: s } => RemovalPolicy::Random {
                        seed: trial_seed(seed, s, t as u64),
                    },
                    other => other,
                };
                let order = match &fixed_order {
                    Some(o) => o.clone(),
                    None => removal_order(graph, p, opts).expect("random order cannot fail"),
                };
                curve_for_order(graph, p, &order, max_fraction, step, opts)
            })
            .collect();
        summaries.push(summarize(policy, &curves));
    }
    Ok(PolicyComparison {
        max_fraction,
        step,
        seed,
        policies: summaries,
    })
}

fn summarize(policy: RemovalPolicy, curves: &[ResilienceCurve]) -> PolicySummary {
    let k = curves.len() as f64;
    let fractions: Vec<f64> = curves[0]
        .points
        .iter()
        .map(|p| p.fraction_removed)
        .collect();
    let len = fractions.len();
    let mut mean = vec![0.0; len];
    let mut sq = vec![0.0; len];
    for c in curves {
        for (i, p) in c.points.iter().enumerate() {
            mean[i] += p.lcc_fraction;
        }
    }
    mean.iter_mut().for_each(|m| *m /= k);
    for c in curves {
        for (i, p) in c.points.iter().enumerate() {
            sq[i] += (p.lcc_fraction - mean[i]).powi(2);
        }
    }
    let std_lcc = sq.iter().map(|s| (s / k).sqrt()).collect();
    let aucs: Vec<f64> = curves.iter().map(|c| c.auc()).collect();
    let auc_mean = aucs.iter().sum::<f64>() / k;
    let auc_std = (aucs.iter().map(|a| (a - auc_mean).powi(2)).sum::<f64>() / k).sqrt();
    PolicySummary {
        policy,
        trials: curves.len(),
        fractions,
        mean_lcc: mean,
        std_lcc,
        auc_mean,
        auc_std,
        aucs,
    }
}

fn trial_seed(base: u64, policy_seed: u64, trial: u64) -> u64 {
    splitmix64(base ^ splitmix64(policy_seed ^ splitmix64(trial)))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;
    use proptest::prelude::*;

    fn synth(n: usize, edges: &[(usize, usize)]) -> DependencyGraph {
        let mut b = GraphBuilder::synthetic();
        for i in 0..n {
            b.add_node(&format!("t:{i:03}"), NodeKind::Artifact, None)
                .unwrap();
        }
        for &(s, d) in edges {
            let _ = b.add_edge_by_index(s, d, EdgeKind::Dependency);
        }
        b.finalize()
    }

    fn star() -> DependencyGraph {
        let edges: Vec<_> = (1..=10).map(|i| (i, 0)).collect();
        synth(11, &edges)
    }

    #[test]
    fn hub_removal_shatters_star() {
        let g = star();
        let c =
            removal_experiment(&g, RemovalPolicy::TargetedDegree, 1.0 / 11.0, 1.0 / 11.0).unwrap();
        assert_eq!(c.batch_size, 1);
        assert_eq!(c.points.len(), 2);
        assert_eq!(c.points[0].lcc_fraction, 1.0);
        assert_eq!(c.points[1].lcc_fraction, 1.0 / 11.0);
    }

    #[test]
    fn zero_fraction_gives_single_point() {
        let g = synth(4, &[(0, 1), (2, 3)]);
        let c = removal_experiment(&g, RemovalPolicy::TargetedDegree, 0.0, 0.1).unwrap();
        assert_eq!(
            c.points,
            vec![CurvePoint {
                fraction_removed: 0.0,
                lcc_fraction: 0.5
            }]
        );
    }

    #[test]
    fn invalid_fractions() {
        let g = star();
        for (max, step) in [(1.5, 0.1), (0.5, 0.0), (0.2, 0.5), (-0.1, 0.1)] {
            assert!(matches!(
                removal_experiment(&g, RemovalPolicy::TargetedDegree, max, step),
                Err(Error::InvalidFraction(_))
            ));
        }
    }

    #[test]
    fn ties_ranked_by_id() {
        let g = synth(4, &[(0, 1), (2, 3)]);
        let order = removal_order(&g, RemovalPolicy::TargetedDegree, &Default::default()).unwrap();
        assert_eq!(order, vec![0, 1, 2, 3]);
    }

    #[test]
    fn complete_graph_stays_connected() {
        let edges: Vec<_> = (0..20)
            .flat_map(|a| (0..20).filter(move |&b| b != a).map(move |b| (a, b)))
            .collect();
        let g = synth(20, &edges);
        for policy in [
            RemovalPolicy::Random { seed: 3 },
            RemovalPolicy::TargetedPageRank,
        ] {
            let c = removal_experiment(&g, policy, 0.9, 0.1).unwrap();
            for p in &c.points {
                assert!((p.lcc_fraction - (1.0 - p.fraction_removed)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn deterministic_policy_has_zero_variance() {
        let g = star();
        let cmp = compare_policies(&g, &[RemovalPolicy::TargetedDegree], 0.5, 0.1, 5, 1).unwrap();
        let s = &cmp.policies[0];
        assert_eq!(s.trials, 5);
        assert!(s.aucs.iter().all(|&a| a == s.aucs[0]));
        assert_eq!(s.auc_std, 0.0);
        assert!(s.std_lcc.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn random_comparison_is_reproducible() {
        let g = synth(30, &(0..29).map(|i| (i, i + 1)).collect::<Vec<_>>());
        let p = [RemovalPolicy::Random { seed: 4 }];
        let a = compare_policies(&g, &p, 0.5, 0.1, 4, 9).unwrap();
        let b = compare_policies(&g, &p, 0.5, 0.1, 4, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.policies[0].auc_std > 0.0);
    }

    #[test]
    fn cascade_removes_releases() {
        let mut b = GraphBuilder::new();
        b.add_node("a:a", NodeKind::Artifact, None).unwrap();
        for i in 0..3 {
            b.add_node(&format!("a:a:{i}"), NodeKind::Release, None)
                .unwrap();
            b.add_edge("a:a", &format!("a:a:{i}"), EdgeKind::Versioning)
                .unwrap();
        }
        b.add_node("b:b", NodeKind::Artifact, None).unwrap();
        b.add_edge("a:a:0", "b:b", EdgeKind::Dependency).unwrap();
        let g = b.finalize();
        let opts = ResilienceOptions {
            cascade_releases: true,
            ..Default::default()
        };
        let c =
            removal_experiment_with(&g, RemovalPolicy::TargetedDegree, 0.2, 0.2, &opts).unwrap();
        // a:a (degree 3) goes first and takes its three releases with it
        assert_eq!(c.points[1].lcc_fraction, 1.0 / 5.0);
        let plain = removal_experiment(&g, RemovalPolicy::TargetedDegree, 0.2, 0.2).unwrap();
        assert_eq!(plain.points[1].lcc_fraction, 2.0 / 5.0);
    }

    #[test]
    fn auc_of_linear_curve() {
        let pts = [
            CurvePoint {
                fraction_removed: 0.0,
                lcc_fraction: 1.0,
            },
            CurvePoint {
                fraction_removed: 1.0,
                lcc_fraction: 0.0,
            },
        ];
        assert_eq!(auc(&pts), 0.5);
    }

    proptest! {
        #[test]
        fn incremental_matches_from_scratch(
            n in 2usize..40,
            raw in proptest::collection::vec((0usize..40, 0usize..40), 0..90),
            seed in 0u64..1000,
            step in 0.05f64..0.5,
        ) {
            let edges: Vec<_> = raw.into_iter().map(|(a, b)| (a % n, b % n)).collect();
            let g = synth(n, &edges);
            let policy = RemovalPolicy::Random { seed };
            let order = removal_order(&g, policy, &Default::default()).unwrap();
            let c = removal_experiment(&g, policy, 1.0, step).unwrap();
            let (_, counts) = batch_schedule(n, 1.0, step);
            prop_assert_eq!(counts.len(), c.points.len());
            for (i, &r) in counts.iter().enumerate() {
                let mut removed = vec![false; n];
                for &v in &order[..r] {
                    removed[v] = true;
                }
                let want = lcc_without(&g, &removed) as f64 / n as f64;
                prop_assert_eq!(c.points[i].lcc_fraction, want);
            }
            for w in c.points.windows(2) {
                prop_assert!(w[0].fraction_removed < w[1].fraction_removed);
            }
        }
    }
}
