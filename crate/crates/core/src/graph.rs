//! Typed directed dependency graph.
//!
//! Nodes are artifacts (`group:artifact`) or releases (`group:artifact:version`).
//! Versioning edges run artifact -> release, dependency edges run
//! release -> artifact. A [`GraphBuilder`] collects nodes and edges and
//! [`GraphBuilder::finalize`] freezes them into a [`DependencyGraph`] with
//! compressed forward and reverse adjacency.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Artifact,
    Release,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Artifact => "artifact",
            NodeKind::Release => "release",
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NodeKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "artifact" => Ok(NodeKind::Artifact),
            "release" => Ok(NodeKind::Release),
            other => Err(format!("unknown node kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Versioning,
    Dependency,
}

impl EdgeKind {
    /// Required (source, target) node kinds.
    pub fn endpoints(self) -> (NodeKind, NodeKind) {
        match self {
            EdgeKind::Versioning => (NodeKind::Artifact, NodeKind::Release),
            EdgeKind::Dependency => (NodeKind::Release, NodeKind::Artifact),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Versioning => "versioning",
            EdgeKind::Dependency => "dependency",
        }
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EdgeKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "versioning" => Ok(EdgeKind::Versioning),
            "dependency" => Ok(EdgeKind::Dependency),
            other => Err(format!("unknown edge kind {other:?}")),
        }
    }
}

/// Maven-style coordinate identifying a node.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        if is_valid_id(&id) {
            Ok(NodeId(id))
        } else {
            Err(Error::InvalidNodeId(id))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for NodeId {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        NodeId::new(value)
    }
}

impl From<NodeId> for String {
    fn from(id: NodeId) -> String {
        id.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub(crate) fn is_valid_id(id: &str) -> bool {
    !id.is_empty() && id.contains(':')
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeRecord {
    pub id: String,
    pub kind: NodeKind,
    /// Publication time in Unix seconds (releases only, when known).
    pub timestamp: Option<i64>,
    pub metadata: Option<String>,
}

/// One direction of compressed adjacency. Slices are sorted by target index.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub(crate) struct Adjacency {
    pub(crate) offsets: Vec<usize>,
    pub(crate) targets: Vec<u32>,
    pub(crate) kinds: Vec<EdgeKind>,
}

impl Adjacency {
    fn from_edges(n: usize, edges: &[(u32, u32, EdgeKind)], reverse: bool) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(s, d, _) in edges {
            let from = if reverse { d } else { s };
            counts[from as usize + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let offsets = counts.clone();
        let mut cursor = counts;
        let mut slots: Vec<(u32, EdgeKind)> = vec![(0, EdgeKind::Dependency); edges.len()];
        for &(s, d, k) in edges {
            let (from, to) = if reverse { (d, s) } else { (s, d) };
            let at = &mut cursor[from as usize];
            slots[*at] = (to, k);
            *at += 1;
        }
        for i in 0..n {
            slots[offsets[i]..offsets[i + 1]].sort_unstable_by_key(|&(t, _)| t);
        }
        let (targets, kinds) = slots.into_iter().unzip();
        Adjacency {
            offsets,
            targets,
            kinds,
        }
    }

    #[inline]
    fn range(&self, v: usize) -> std::ops::Range<usize> {
        self.offsets[v]..self.offsets[v + 1]
    }
}

#[derive(Debug, Clone, Default)]
pub struct GraphBuilder {
    nodes: Vec<NodeRecord>,
    index: HashMap<String, u32>,
    edges: Vec<(u32, u32, EdgeKind)>,
    edge_index: HashMap<(u32, u32), usize>,
    synthetic: bool,
    duplicate_edges: usize,
    rejected_self_loops: usize,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builder for generated graphs: node/edge kind rules are not enforced.
    pub fn synthetic() -> Self {
        GraphBuilder {
            synthetic: true,
            ..Self::default()
        }
    }

    pub fn is_synthetic(&self) -> bool {
        self.synthetic
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn duplicate_edges(&self) -> usize {
        self.duplicate_edges
    }

    pub fn rejected_self_loops(&self) -> usize {
        self.rejected_self_loops
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).map(|&i| i as usize)
    }

    /// Registers a node and returns its dense index. Re-adding an id with
    /// the same kind returns the existing index.
    pub fn add_node(&mut self, id: &str, kind: NodeKind, timestamp: Option<i64>) -> Result<usize> {
        if !is_valid_id(id) {
            return Err(Error::InvalidNodeId(id.to_string()));
        }
        match self.index.entry(id.to_string()) {
            Entry::Occupied(e) => {
                let idx = *e.get() as usize;
                let existing = self.nodes[idx].kind;
                if existing != kind {
                    return Err(Error::KindConflict {
                        id: id.to_string(),
                        existing,
                        requested: kind,
                    });
                }
                Ok(idx)
            }
            Entry::Vacant(e) => {
                let idx = self.nodes.len();
                assert!(idx < u32::MAX as usize, "node count exceeds u32 range");
                e.insert(idx as u32);
                self.nodes.push(NodeRecord {
                    id: id.to_string(),
                    kind,
                    timestamp,
                    metadata: None,
                });
                Ok(idx)
            }
        }
    }

    pub fn set_metadata(&mut self, id: &str, metadata: impl Into<String>) -> Result<()> {
        let idx = self
            .index_of(id)
            .ok_or_else(|| Error::UnknownNode(id.to_string()))?;
        self.nodes[idx].metadata = Some(metadata.into());
        Ok(())
    }

    /// Adds an edge between registered nodes, returning its insertion index.
    /// A repeated edge returns the index of the first occurrence.
    pub fn add_edge(&mut self, src: &str, dst: &str, kind: EdgeKind) -> Result<usize> {
        let s = self
            .index_of(src)
            .ok_or_else(|| Error::UnknownNode(src.to_string()))?;
        let d = self
            .index_of(dst)
            .ok_or_else(|| Error::UnknownNode(dst.to_string()))?;
        self.add_edge_by_index(s, d, kind)
    }

    pub fn add_edge_by_index(&mut self, src: usize, dst: usize, kind: EdgeKind) -> Result<usize> {
        if src >= self.nodes.len() {
            return Err(Error::UnknownNode(format!("#{src}")));
        }
        if dst >= self.nodes.len() {
            return Err(Error::UnknownNode(format!("#{dst}")));
        }
        if src == dst {
            self.rejected_self_loops += 1;
            return Err(Error::SelfLoop(self.nodes[src].id.clone()));
        }
        if !self.synthetic {
            let (want_src, want_dst) = kind.endpoints();
            if self.nodes[src].kind != want_src || self.nodes[dst].kind != want_dst {
                return Err(Error::EndpointKindMismatch {
                    src: self.nodes[src].id.clone(),
                    dst: self.nodes[dst].id.clone(),
                    kind,
                    expected_src: want_src,
                    expected_dst: want_dst,
                });
            }
        }
        let key = (src as u32, dst as u32);
        match self.edge_index.entry(key) {
            Entry::Occupied(e) => {
                let at = *e.get();
                let existing = self.edges[at].2;
                if existing != kind {
                    return Err(Error::ParallelEdge {
                        src: self.nodes[src].id.clone(),
                        dst: self.nodes[dst].id.clone(),
                        existing,
                    });
                }
                self.duplicate_edges += 1;
                Ok(at)
            }
            Entry::Vacant(e) => {
                let at = self.edges.len();
                e.insert(at);
                self.edges.push((key.0, key.1, kind));
                Ok(at)
            }
        }
    }

    pub fn finalize(self) -> DependencyGraph {
        if self.rejected_self_loops > 0 {
            log::warn!("rejected {} self-loop edge(s)", self.rejected_self_loops);
        }
        DependencyGraph::from_parts(self.nodes, self.index, &self.edges, self.synthetic)
    }
}

/// Immutable directed graph with O(1) access to in- and out-adjacency.
#[derive(Debug, Clone)]
pub struct DependencyGraph {
    nodes: Vec<NodeRecord>,
    index: HashMap<String, u32>,
    out: Adjacency,
    inc: Adjacency,
    synthetic: bool,
}

impl PartialEq for DependencyGraph {
    fn eq(&self, other: &Self) -> bool {
        // `index` is derived from `nodes`, `inc` from `out`.
        self.synthetic == other.synthetic && self.nodes == other.nodes && self.out == other.out
    }
}

impl Eq for DependencyGraph {}

impl DependencyGraph {
    pub(crate) fn from_parts(
        nodes: Vec<NodeRecord>,
        index: HashMap<String, u32>,
        edges: &[(u32, u32, EdgeKind)],
        synthetic: bool,
    ) -> Self {
        let n = nodes.len();
        let out = Adjacency::from_edges(n, edges, false);
        let inc = Adjacency::from_edges(n, edges, true);
        DependencyGraph {
            nodes,
            index,
            out,
            inc,
            synthetic,
        }
    }

    pub(crate) fn from_nodes_and_edges(
        nodes: Vec<NodeRecord>,
        edges: &[(u32, u32, EdgeKind)],
        synthetic: bool,
    ) -> Self {
        let index = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.clone(), i as u32))
            .collect();
        Self::from_parts(nodes, index, edges, synthetic)
    }

    pub fn empty() -> Self {
        GraphBuilder::new().finalize()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_synthetic(&self) -> bool {
        self.synthetic
    }

    pub fn nodes(&self) -> &[NodeRecord] {
        &self.nodes
    }

    pub fn node(&self, v: usize) -> &NodeRecord {
        &self.nodes[v]
    }

    pub fn id(&self, v: usize) -> &str {
        &self.nodes[v].id
    }

    pub fn kind(&self, v: usize) -> NodeKind {
        self.nodes[v].kind
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).map(|&i| i as usize)
    }

    pub fn require(&self, id: &str) -> Result<usize> {
        self.index_of(id)
            .ok_or_else(|| Error::UnknownNode(id.to_string()))
    }

    #[inline]
    pub fn out_neighbors(&self, v: usize) -> &[u32] {
        &self.out.targets[self.out.range(v)]
    }

    #[inline]
    pub fn in_neighbors(&self, v: usize) -> &[u32] {
        &self.inc.targets[self.inc.range(v)]
    }

    pub fn out_edges(&self, v: usize) -> impl Iterator<Item = (usize, EdgeKind)> + '_ {
        let r = self.out.range(v);
        self.out.targets[r.clone()]
            .iter()
            .zip(&self.out.kinds[r])
            .map(|(&t, &k)| (t as usize, k))
    }

    pub fn in_edges(&self, v: usize) -> impl Iterator<Item = (usize, EdgeKind)> + '_ {
        let r = self.inc.range(v);
        self.inc.targets[r.clone()]
            .iter()
            .zip(&self.inc.kinds[r])
            .map(|(&t, &k)| (t as usize, k))
    }

    #[inline]
    pub fn out_degree(&self, v: usize) -> usize {
        self.out.offsets[v + 1] - self.out.offsets[v]
    }

    #[inline]
    pub fn in_degree(&self, v: usize) -> usize {
        self.inc.offsets[v + 1] - self.inc.offsets[v]
    }

    /// (in-degree, out-degree) of the named node, counting both edge kinds.
    pub fn degree(&self, id: &str) -> Result<(usize, usize)> {
        let v = self.require(id)?;
        Ok((self.in_degree(v), self.out_degree(v)))
    }

    /// All edges as (src, dst, kind), ordered by source then target index.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, EdgeKind)> + '_ {
        (0..self.node_count()).flat_map(move |s| self.out_edges(s).map(move |(d, k)| (s, d, k)))
    }

    pub(crate) fn out_adjacency(&self) -> &Adjacency {
        &self.out
    }

    /// Graph with every edge reversed. The result is flagged synthetic since
    /// reversed edges no longer satisfy the artifact/release endpoint rule.
    pub fn transpose(&self) -> DependencyGraph {
        DependencyGraph {
            nodes: self.nodes.clone(),
            index: self.index.clone(),
            out: self.inc.clone(),
            inc: self.out.clone(),
            synthetic: true,
        }
    }

    /// Induced subgraph on the nodes with `keep[v] == true`, preserving the
    /// relative node order of `self`.
    pub fn induced_subgraph(&self, keep: &[bool]) -> DependencyGraph {
        assert_eq!(keep.len(), self.node_count());
        let mut remap = vec![u32::MAX; self.node_count()];
        let mut nodes = Vec::new();
        for (v, _) in keep.iter().enumerate().filter(|(_, &k)| k) {
            remap[v] = nodes.len() as u32;
            nodes.push(self.nodes[v].clone());
        }
        let edges: Vec<(u32, u32, EdgeKind)> = self
            .edges()
            .filter(|&(s, d, _)| keep[s] && keep[d])
            .map(|(s, d, k)| (remap[s], remap[d], k))
            .collect();
        DependencyGraph::from_nodes_and_edges(nodes, &edges, self.synthetic)
    }
}
