//! Flat-file loading, top-K seed selection and BFS-expansion sampling.

use std::collections::VecDeque;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DependencyGraph, EdgeKind, GraphBuilder, NodeKind};

pub const NODES_HEADER: [&str; 3] = ["id", "kind", "timestamp"];
pub const EDGES_HEADER: [&str; 3] = ["src", "dst", "kind"];

/// Malformed rows tolerated per file, as a fraction of data rows.
pub const MALFORMED_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Accept edges regardless of the artifact/release endpoint rule
    /// (needed to reload generated graphs).
    pub relaxed_kinds: bool,
}

/// Row accounting for one `load_csv` call.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadReport {
    pub node_rows: usize,
    pub edge_rows: usize,
    /// Rows that failed to parse (field count, kind, timestamp, id syntax).
    pub malformed_node_rows: usize,
    pub malformed_edge_rows: usize,
    /// Node rows repeating an id with a different kind.
    pub conflicting_node_rows: usize,
    pub unknown_endpoint_edges: usize,
    pub kind_mismatch_edges: usize,
    pub self_loop_edges: usize,
    /// Repeated edges, merged into one.
    pub duplicate_edges: usize,
}

impl LoadReport {
    /// Rows that did not make it into the graph.
    pub fn skipped_rows(&self) -> usize {
        self.malformed_node_rows
            + self.malformed_edge_rows
            + self.conflicting_node_rows
            + self.unknown_endpoint_edges
            + self.kind_mismatch_edges
            + self.self_loop_edges
    }
}

pub fn load_csv(nodes_path: &Path, edges_path: &Path) -> Result<(DependencyGraph, LoadReport)> {
    load_csv_with(nodes_path, edges_path, LoadOptions::default())
}

pub fn load_csv_with(
    nodes_path: &Path,
    edges_path: &Path,
    opts: LoadOptions,
) -> Result<(DependencyGraph, LoadReport)> {
    let nodes = File::open(nodes_path).map_err(|e| Error::io(nodes_path, e))?;
    let edges = File::open(edges_path).map_err(|e| Error::io(edges_path, e))?;
    load_csv_readers(nodes, nodes_path, edges, edges_path, opts)
}

/// Same as [`load_csv_with`] over arbitrary readers; the paths only label errors.
pub fn load_csv_readers<N: Read, E: Read>(
    nodes: N,
    nodes_path: &Path,
    edges: E,
    edges_path: &Path,
    opts: LoadOptions,
) -> Result<(DependencyGraph, LoadReport)> {
    let mut builder = if opts.relaxed_kinds {
        GraphBuilder::synthetic()
    } else {
        GraphBuilder::new()
    };
    let mut report = LoadReport::default();

    let mut rdr = csv_reader(nodes);
    check_header(&mut rdr, nodes_path, &NODES_HEADER)?;
    for row in rdr.records() {
        report.node_rows += 1;
        let Some((id, kind, ts)) = row.ok().and_then(|r| parse_node_row(&r)) else {
            report.malformed_node_rows += 1;
            continue;
        };
        match builder.add_node(&id, kind, ts) {
            Ok(_) => {}
            Err(Error::KindConflict { .. }) => report.conflicting_node_rows += 1,
            Err(_) => report.malformed_node_rows += 1,
        }
    }
    check_tolerance(nodes_path, report.malformed_node_rows, report.node_rows)?;

    let mut rdr = csv_reader(edges);
    check_header(&mut rdr, edges_path, &EDGES_HEADER)?;
    for row in rdr.records() {
        report.edge_rows += 1;
        let Some((src, dst, kind)) = row.ok().and_then(|r| parse_edge_row(&r)) else {
            report.malformed_edge_rows += 1;
            continue;
        };
        match builder.add_edge(&src, &dst, kind) {
            Ok(_) => {}
            Err(Error::UnknownNode(_)) => report.unknown_endpoint_edges += 1,
            Err(Error::EndpointKindMismatch { .. }) | Err(Error::ParallelEdge { .. }) => {
                report.kind_mismatch_edges += 1
            }
            Err(Error::SelfLoop(_)) => report.self_loop_edges += 1,
            Err(e) => return Err(e),
        }
    }
    check_tolerance(edges_path, report.malformed_edge_rows, report.edge_rows)?;
    report.duplicate_edges = builder.duplicate_edges();

    if report.skipped_rows() > 0 {
        log::warn!("skipped {} row(s) while loading", report.skipped_rows());
    }
    Ok((builder.finalize(), report))
}

fn csv_reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(r)
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, path: &Path, want: &[&str; 3]) -> Result<()> {
    let header = rdr.headers().map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let got: Vec<&str> = header.iter().collect();
    if got.as_slice() != want.as_slice() {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: format!(
                "expected header {}, found {}",
                want.join(","),
                got.join(",")
            ),
        });
    }
    Ok(())
}

fn check_tolerance(path: &Path, malformed: usize, total: usize) -> Result<()> {
    if malformed as f64 > MALFORMED_TOLERANCE * total as f64 {
        return Err(Error::TooManyMalformedRows {
            path: path.to_path_buf(),
            malformed,
            total,
        });
    }
    Ok(())
}

fn parse_node_row(r: &csv::StringRecord) -> Option<(String, NodeKind, Option<i64>)> {
    if r.len() != 3 {
        return None;
    }
    let kind = NodeKind::from_str(&r[1]).ok()?;
    let ts = match &r[2] {
        "" => None,
        s => Some(s.parse::<i64>().ok()?),
    };
    Some((r[0].to_string(), kind, ts))
}

fn parse_edge_row(r: &csv::StringRecord) -> Option<(String, String, EdgeKind)> {
    if r.len() != 3 {
        return None;
    }
    let kind = EdgeKind::from_str(&r[2]).ok()?;
    Some((r[0].to_string(), r[1].to_string(), kind))
}

/// Writes the graph as a `nodes.csv` / `edges.csv` pair.
pub fn write_csv(graph: &DependencyGraph, nodes_path: &Path, edges_path: &Path) -> Result<()> {
    let f = File::create(nodes_path).map_err(|e| Error::io(nodes_path, e))?;
    write_nodes_csv(graph, BufWriter::new(f)).map_err(|e| Error::io(nodes_path, e))?;
    let f = File::create(edges_path).map_err(|e| Error::io(edges_path, e))?;
    write_edges_csv(graph, BufWriter::new(f)).map_err(|e| Error::io(edges_path, e))
}

pub fn write_nodes_csv<W: Write>(graph: &DependencyGraph, w: W) -> std::io::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(NODES_HEADER)?;
    for n in graph.nodes() {
        let ts = n.timestamp.map(|t| t.to_string()).unwrap_or_default();
        wtr.write_record([n.id.as_str(), n.kind.as_str(), ts.as_str()])?;
    }
    wtr.flush()
}

pub fn write_edges_csv<W: Write>(graph: &DependencyGraph, w: W) -> std::io::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(EDGES_HEADER)?;
    for (s, d, k) in graph.edges() {
        wtr.write_record([graph.id(s), graph.id(d), k.as_str()])?;
    }
    wtr.flush()
}

/// Artifacts ranked by incoming dependency edges, descending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSet {
    pub seeds: Vec<Seed>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seed {
    pub id: String,
    pub incoming: usize,
}

impl SeedSet {
    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }
}

/// The `k` artifacts with the most incoming dependency edges. Artifacts
/// nobody depends on are never seeds. Ties go to the lexicographically
/// smaller id.
pub fn select_top_seeds(graph: &DependencyGraph, k: usize) -> SeedSet {
    let mut ranked: Vec<(usize, usize)> = (0..graph.node_count())
        .filter(|&v| graph.kind(v) == NodeKind::Artifact)
        .map(|v| {
            let incoming = graph
                .in_edges(v)
                .filter(|&(_, kind)| kind == EdgeKind::Dependency)
                .count();
            (v, incoming)
        })
        .filter(|&(_, c)| c > 0)
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| graph.id(a.0).cmp(graph.id(b.0))));
    ranked.truncate(k);
    SeedSet {
        seeds: ranked
            .into_iter()
            .map(|(v, incoming)| Seed {
                id: graph.id(v).to_string(),
                incoming,
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Reverse,
    #[default]
    Both,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Forward => "forward",
            Direction::Reverse => "reverse",
            Direction::Both => "both",
        })
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "forward" => Ok(Direction::Forward),
            "reverse" => Ok(Direction::Reverse),
            "both" => Ok(Direction::Both),
            other => Err(format!("unknown direction {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub k: usize,
    pub depth: usize,
    pub direction: Direction,
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec {
            k: 5000,
            depth: 2,
            direction: Direction::Both,
        }
    }
}

impl SampleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be >= 1".into()));
        }
        if self.depth == 0 {
            return Err(Error::InvalidParameter("depth must be >= 1".into()));
        }
        Ok(())
    }
}

/// Induced subgraph on every node within `spec.depth` hops of any seed.
pub fn bfs_sample(
    graph: &DependencyGraph,
    seeds: &SeedSet,
    spec: &SampleSpec,
) -> Result<DependencyGraph> {
    let ids: Vec<&str> = seeds.seeds.iter().map(|s| s.id.as_str()).collect();
    sample_from(graph, &ids, spec)
}

/// [`bfs_sample`] from an arbitrary list of seed ids.
pub fn sample_from(
    graph: &DependencyGraph,
    seed_ids: &[&str],
    spec: &SampleSpec,
) -> Result<DependencyGraph> {
    spec.validate()?;
    let mut seeds = Vec::with_capacity(seed_ids.len());
    for id in seed_ids {
        seeds.push(
            graph
                .index_of(id)
                .ok_or_else(|| Error::UnknownSeed(id.to_string()))?,
        );
    }
    let reached = reachable_within(graph, &seeds, spec.depth, spec.direction);
    Ok(graph.induced_subgraph(&reached))
}

/// Multi-source BFS: every seed starts at distance 0 and each node is
/// enqueued at most once, so the result is the union of the per-seed balls.
pub(crate) fn reachable_within(
    graph: &DependencyGraph,
    seeds: &[usize],
    depth: usize,
    direction: Direction,
) -> Vec<bool> {
    let mut visited = vec![false; graph.node_count()];
    let mut frontier: Vec<usize> = Vec::new();
    for &s in seeds {
        if !visited[s] {
            visited[s] = true;
            frontier.push(s);
        }
    }
    frontier.sort_unstable();
    let mut next = Vec::new();
    for _ in 0..depth {
        if frontier.is_empty() {
            break;
        }
        for &v in &frontier {
            let fwd = matches!(direction, Direction::Forward | Direction::Both);
            let rev = matches!(direction, Direction::Reverse | Direction::Both);
            let outs = if fwd { graph.out_neighbors(v) } else { &[] };
            let ins = if rev { graph.in_neighbors(v) } else { &[] };
            for &w in outs.iter().chain(ins) {
                let w = w as usize;
                if !visited[w] {
                    visited[w] = true;
                    next.push(w);
                }
            }
        }
        next.sort_unstable();
        std::mem::swap(&mut frontier, &mut next);
        next.clear();
    }
    visited
}

/// Written next to every sampled graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleManifest {
    pub seed_count: usize,
    pub depth: usize,
    pub direction: Direction,
    pub node_count: usize,
    pub edge_count: usize,
    pub skipped_rows: usize,
}

/// Plain BFS queue variant, used in tests as an independent check.
#[doc(hidden)]
pub fn ball(
    graph: &DependencyGraph,
    seed: usize,
    depth: usize,
    direction: Direction,
) -> Vec<usize> {
    let mut dist = vec![usize::MAX; graph.node_count()];
    let mut q = VecDeque::from([seed]);
    dist[seed] = 0;
    while let Some(v) = q.pop_front() {
        if dist[v] == depth {
            continue;
        }
        let mut nbrs: Vec<u32> = Vec::new();
        if matches!(direction, Direction::Forward | Direction::Both) {
            nbrs.extend_from_slice(graph.out_neighbors(v));
        }
        if matches!(direction, Direction::Reverse | Direction::Both) {
            nbrs.extend_from_slice(graph.in_neighbors(v));
        }
        for w in nbrs {
            let w = w as usize;
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                q.push_back(w);
            }
        }
    }
    (0..graph.node_count())
        .filter(|&v| dist[v] != usize::MAX)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn load(nodes: &str, edges: &str) -> Result<(DependencyGraph, LoadReport)> {
        load_csv_readers(
            nodes.as_bytes(),
            Path::new("nodes.csv"),
            edges.as_bytes(),
            Path::new("edges.csv"),
            LoadOptions::default(),
        )
    }

    const NODES: &str = "id,kind,timestamp\n\
        a:a,artifact,\n\
        a:a:1,release,1600000000\n\
        \"b:b,x\",artifact,\n";

    #[test]
    fn loads_rows() {
        let edges = "src,dst,kind\na:a,a:a:1,versioning\na:a:1,\"b:b,x\",dependency\n";
        let (g, rep) = load(NODES, edges).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (3, 2));
        assert_eq!(g.node(1).timestamp, Some(1_600_000_000));
        assert_eq!(rep.skipped_rows(), 0);
    }

    #[test]
    fn unknown_endpoint_is_skipped_and_counted() {
        let edges = "src,dst,kind\na:a,a:a:1,versioning\na:a:1,zz:zz,dependency\n";
        let (g, rep) = load(NODES, edges).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(rep.unknown_endpoint_edges, 1);
        assert_eq!(rep.skipped_rows(), 1);
    }

    #[test]
    fn header_mismatch() {
        let err = load("id,type,ts\n", "src,dst,kind\n").unwrap_err();
        assert!(matches!(err, Error::Format { .. }));
        let err = load(NODES, "from,to,kind\n").unwrap_err();
        assert!(matches!(err, Error::Format { .. }));
    }

    #[test]
    fn malformed_rows_over_tolerance_fail() {
        let nodes = "id,kind,timestamp\na:a,artifact,\nb:b,library,\n";
        let err = load(nodes, "src,dst,kind\n").unwrap_err();
        assert!(matches!(
            err,
            Error::TooManyMalformedRows {
                malformed: 1,
                total: 2,
                ..
            }
        ));
    }

    #[test]
    fn malformed_rows_under_tolerance_pass() {
        let mut nodes = String::from("id,kind,timestamp\n");
        for i in 0..200 {
            nodes.push_str(&format!("g:a{i},artifact,\n"));
        }
        nodes.push_str("g:bad,artifact,notanumber\n");
        let (g, rep) = load(&nodes, "src,dst,kind\n").unwrap();
        assert_eq!(g.node_count(), 200);
        assert_eq!(rep.malformed_node_rows, 1);
    }

    #[test]
    fn csv_round_trip() {
        let edges = "src,dst,kind\na:a,a:a:1,versioning\na:a:1,\"b:b,x\",dependency\n";
        let (g, _) = load(NODES, edges).unwrap();
        let mut n = Vec::new();
        let mut e = Vec::new();
        write_nodes_csv(&g, &mut n).unwrap();
        write_edges_csv(&g, &mut e).unwrap();
        let (back, _) = load_csv_readers(
            n.as_slice(),
            Path::new("n"),
            e.as_slice(),
            Path::new("e"),
            LoadOptions::default(),
        )
        .unwrap();
        assert_eq!(back, g);
    }

    fn seeds_graph() -> DependencyGraph {
        let mut b = GraphBuilder::new();
        for a in ["x:x", "y:y", "p:p", "q:q", "z:z"] {
            b.add_node(a, NodeKind::Artifact, None).unwrap();
        }
        for r in ["r:r:1", "r:r:2", "r:r:3"] {
            b.add_node(r, NodeKind::Release, None).unwrap();
        }
        for r in ["r:r:1", "r:r:2", "r:r:3"] {
            b.add_edge(r, "x:x", EdgeKind::Dependency).unwrap();
        }
        b.add_edge("r:r:1", "y:y", EdgeKind::Dependency).unwrap();
        b.add_edge("r:r:1", "q:q", EdgeKind::Dependency).unwrap();
        b.add_edge("r:r:2", "q:q", EdgeKind::Dependency).unwrap();
        b.add_edge("r:r:1", "p:p", EdgeKind::Dependency).unwrap();
        b.add_edge("r:r:3", "p:p", EdgeKind::Dependency).unwrap();
        // versioning edges do not count as incoming dependencies
        b.add_edge("z:z", "r:r:1", EdgeKind::Versioning).unwrap();
        b.finalize()
    }

    #[test]
    fn top_seed_by_incoming_dependencies() {
        let g = seeds_graph();
        let s = select_top_seeds(&g, 1);
        assert_eq!(
            s.seeds,
            vec![Seed {
                id: "x:x".into(),
                incoming: 3
            }]
        );
    }

    #[test]
    fn ties_are_lexicographic_and_k_larger_returns_all() {
        let g = seeds_graph();
        let s = select_top_seeds(&g, 2);
        assert_eq!(s.seeds[1].id, "p:p");
        let all = select_top_seeds(&g, 100);
        let ids: Vec<_> = all
            .seeds
            .iter()
            .map(|s| (s.id.as_str(), s.incoming))
            .collect();
        assert_eq!(ids, vec![("x:x", 3), ("p:p", 2), ("q:q", 2), ("y:y", 1)]);
    }

    fn toy() -> DependencyGraph {
        let mut b = GraphBuilder::new();
        b.add_node("g:a", NodeKind::Artifact, None).unwrap();
        b.add_node("g:a:1", NodeKind::Release, None).unwrap();
        b.add_node("g:a:2", NodeKind::Release, None).unwrap();
        b.add_node("g:b:1", NodeKind::Release, None).unwrap();
        b.add_edge("g:a", "g:a:1", EdgeKind::Versioning).unwrap();
        b.add_edge("g:a", "g:a:2", EdgeKind::Versioning).unwrap();
        b.add_edge("g:b:1", "g:a", EdgeKind::Dependency).unwrap();
        b.finalize()
    }

    #[test]
    fn sample_four_node_toy() {
        let g = toy();
        let spec = SampleSpec {
            k: 1,
            depth: 2,
            direction: Direction::Both,
        };
        let s = sample_from(&g, &["g:a"], &spec).unwrap();
        let ids: BTreeSet<_> = s.nodes().iter().map(|n| n.id.as_str()).collect();
        assert_eq!(ids, BTreeSet::from(["g:a", "g:a:1", "g:a:2", "g:b:1"]));
        assert_eq!(s.edge_count(), 3);
    }

    #[test]
    fn isolated_seed_depth_one() {
        let mut b = GraphBuilder::new();
        b.add_node("g:lonely", NodeKind::Artifact, None).unwrap();
        b.add_node("g:other", NodeKind::Artifact, None).unwrap();
        let g = b.finalize();
        let spec = SampleSpec {
            k: 1,
            depth: 1,
            direction: Direction::Both,
        };
        let s = sample_from(&g, &["g:lonely"], &spec).unwrap();
        assert_eq!((s.node_count(), s.edge_count()), (1, 0));
    }

    #[test]
    fn unknown_seed() {
        let g = toy();
        let spec = SampleSpec::default();
        assert!(matches!(
            sample_from(&g, &["no:pe"], &spec),
            Err(Error::UnknownSeed(_))
        ));
    }

    #[test]
    fn overlapping_seeds_match_union_of_balls() {
        let g = seeds_graph();
        let spec = SampleSpec {
            k: 2,
            depth: 1,
            direction: Direction::Both,
        };
        let s = sample_from(&g, &["x:x", "q:q"], &spec).unwrap();
        let x = g.index_of("x:x").unwrap();
        let q = g.index_of("q:q").unwrap();
        let union: BTreeSet<usize> = ball(&g, x, 1, Direction::Both)
            .into_iter()
            .chain(ball(&g, q, 1, Direction::Both))
            .collect();
        assert_eq!(s.node_count(), union.len());
    }

    #[test]
    fn invalid_spec() {
        let g = toy();
        let spec = SampleSpec {
            k: 1,
            depth: 0,
            direction: Direction::Both,
        };
        assert!(matches!(
            sample_from(&g, &["g:a"], &spec),
            Err(Error::InvalidParameter(_))
        ));
    }
}
