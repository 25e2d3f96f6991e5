//! Binary snapshot format (`DGM1`) for fast reload of a finalized graph.
//!
//! All integers are little-endian.
//!
//! ```text
//! magic           4 bytes  "DGM1"
//! version         u32      1
//! flags           u32      bit 0: synthetic (kind rules not enforced)
//! node_count      u64      N
//! edge_count      u64      M
//! N node records:
//!   kind          u8       0 = artifact, 1 = release
//!   presence      u8       bit 0: timestamp present, bit 1: metadata present
//!   timestamp     i64      only if bit 0
//!   id_len        u32      followed by id_len bytes of UTF-8
//!   meta_len      u32      only if bit 1, followed by meta_len bytes of UTF-8
//! offsets         (N+1) x u64   forward adjacency row starts
//! targets         M x u32       forward adjacency, sorted within each row
//! edge kinds      M x u8        0 = versioning, 1 = dependency
//! ```
//!
//! The reverse adjacency is rebuilt on load.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{is_valid_id, DependencyGraph, EdgeKind, NodeKind, NodeRecord};

pub const MAGIC: &[u8; 4] = b"DGM1";
pub const FORMAT_VERSION: u32 = 1;

const FLAG_SYNTHETIC: u32 = 1;
const HAS_TIMESTAMP: u8 = 1;
const HAS_METADATA: u8 = 2;

pub fn write_snapshot<W: Write>(graph: &DependencyGraph, mut w: W) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    let flags = if graph.is_synthetic() {
        FLAG_SYNTHETIC
    } else {
        0
    };
    w.write_all(&flags.to_le_bytes())?;
    w.write_all(&(graph.node_count() as u64).to_le_bytes())?;
    w.write_all(&(graph.edge_count() as u64).to_le_bytes())?;
    for node in graph.nodes() {
        w.write_all(&[node_kind_code(node.kind)])?;
        let mut presence = 0u8;
        if node.timestamp.is_some() {
            presence |= HAS_TIMESTAMP;
        }
        if node.metadata.is_some() {
            presence |= HAS_METADATA;
        }
        w.write_all(&[presence])?;
        if let Some(ts) = node.timestamp {
            w.write_all(&ts.to_le_bytes())?;
        }
        write_str(&mut w, &node.id)?;
        if let Some(meta) = &node.metadata {
            write_str(&mut w, meta)?;
        }
    }
    let adj = graph.out_adjacency();
    for &o in &adj.offsets {
        w.write_all(&(o as u64).to_le_bytes())?;
    }
    for &t in &adj.targets {
        w.write_all(&t.to_le_bytes())?;
    }
    let kinds: Vec<u8> = adj.kinds.iter().map(|&k| edge_kind_code(k)).collect();
    w.write_all(&kinds)?;
    w.flush()
}

pub fn to_bytes(graph: &DependencyGraph) -> Vec<u8> {
    let mut buf = Vec::new();
    write_snapshot(graph, &mut buf).expect("writing to Vec cannot fail");
    buf
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<DependencyGraph> {
    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Snapshot(format!("bad magic {magic:?}")));
    }
    let version = read_u32(&mut r)?;
    if version != FORMAT_VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let flags = read_u32(&mut r)?;
    let synthetic = flags & FLAG_SYNTHETIC != 0;
    let n = read_u64(&mut r)? as usize;
    let m = read_u64(&mut r)? as usize;
    if n > u32::MAX as usize {
        return Err(Error::Snapshot(format!("node count {n} too large")));
    }

    let mut nodes = Vec::with_capacity(n.min(1 << 24));
    for _ in 0..n {
        let mut head = [0u8; 2];
        read_exact(&mut r, &mut head)?;
        let kind = match head[0] {
            0 => NodeKind::Artifact,
            1 => NodeKind::Release,
            k => return Err(Error::Snapshot(format!("bad node kind code {k}"))),
        };
        let timestamp = if head[1] & HAS_TIMESTAMP != 0 {
            Some(read_u64(&mut r)? as i64)
        } else {
            None
        };
        let id = read_str(&mut r)?;
        if !is_valid_id(&id) {
            return Err(Error::Snapshot(format!("invalid node id {id:?}")));
        }
        let metadata = if head[1] & HAS_METADATA != 0 {
            Some(read_str(&mut r)?)
        } else {
            None
        };
        nodes.push(NodeRecord {
            id,
            kind,
            timestamp,
            metadata,
        });
    }

    let mut offsets = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        offsets.push(read_u64(&mut r)? as usize);
    }
    if offsets[0] != 0 || offsets[n] != m || offsets.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Snapshot("inconsistent adjacency offsets".into()));
    }
    let mut targets = Vec::with_capacity(m.min(1 << 26));
    for _ in 0..m {
        targets.push(read_u32(&mut r)?);
    }
    let mut kind_codes = vec![0u8; m];
    read_exact(&mut r, &mut kind_codes)?;

    let mut edges = Vec::with_capacity(m);
    for s in 0..n {
        for e in offsets[s]..offsets[s + 1] {
            let d = targets[e] as usize;
            if d >= n || d == s {
                return Err(Error::Snapshot(format!("invalid edge {s} -> {d}")));
            }
            if e > offsets[s] && targets[e - 1] >= targets[e] {
                return Err(Error::Snapshot(format!("unsorted or duplicate row {s}")));
            }
            let kind = match kind_codes[e] {
                0 => EdgeKind::Versioning,
                1 => EdgeKind::Dependency,
                k => return Err(Error::Snapshot(format!("bad edge kind code {k}"))),
            };
            if !synthetic {
                let (ks, kd) = kind.endpoints();
                if nodes[s].kind != ks || nodes[d].kind != kd {
                    return Err(Error::Snapshot(format!(
                        "edge {s} -> {d} violates {kind} endpoint rule"
                    )));
                }
            }
            edges.push((s as u32, d as u32, kind));
        }
    }
    let mut seen = std::collections::HashSet::with_capacity(n);
    if !nodes.iter().all(|node| seen.insert(node.id.as_str())) {
        return Err(Error::Snapshot("duplicate node ids".into()));
    }
    Ok(DependencyGraph::from_nodes_and_edges(
        nodes, &edges, synthetic,
    ))
}

pub fn from_bytes(bytes: &[u8]) -> Result<DependencyGraph> {
    read_snapshot(bytes)
}

pub fn save(graph: &DependencyGraph, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_snapshot(graph, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<DependencyGraph> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_snapshot(BufReader::new(file))
}

fn node_kind_code(k: NodeKind) -> u8 {
    match k {
        NodeKind::Artifact => 0,
        NodeKind::Release => 1,
    }
}

fn edge_kind_code(k: EdgeKind) -> u8 {
    match k {
        EdgeKind::Versioning => 0,
        EdgeKind::Dependency => 1,
    }
}

fn write_str<W: Write>(w: &mut W, s: &str) -> std::io::Result<()> {
    w.write_all(&(s.len() as u32).to_le_bytes())?;
    w.write_all(s.as_bytes())
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf)
        .map_err(|e| Error::Snapshot(format!("truncated snapshot: {e}")))
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_str<R: Read>(r: &mut R) -> Result<String> {
    let len = read_u32(r)? as usize;
    let mut buf = vec![0u8; len];
    read_exact(r, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Snapshot(format!("invalid UTF-8: {e}")))
}
