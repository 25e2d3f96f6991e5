//! C ABI over `dgm-core`.
//!
//! Graphs are opaque `DgmGraph` handles created by a loader or generator and
//! released with [`dgm_graph_free`]. Every fallible call returns a
//! [`DgmStatus`]; on failure a description is available from
//! [`dgm_last_error`] on the same thread until the next failing call.
//! Metric results are written into caller-owned buffers of exactly
//! `dgm_graph_node_count` elements.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use dgm_core::ingest::{self, Direction, LoadOptions, SampleSpec};
use dgm_core::metrics::{
    betweenness_exact, betweenness_sampled, connected_components, pagerank, ComponentMode,
    PageRankParams,
};
use dgm_core::synth::{self, Family, GeneratorSpec, Orientation};
use dgm_core::{snapshot, DependencyGraph, Error};

/// Bumped whenever a signature or struct layout in `dgm.h` changes.
pub const DGM_ABI_VERSION: u32 = 1;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DgmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Format = 4,
    Graph = 5,
    NotConverged = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DgmDirection {
    Forward = 0,
    Reverse = 1,
    Both = 2,
}

/// Opaque graph handle.
pub struct DgmGraph {
    inner: DependencyGraph,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> DgmStatus {
    match err {
        Error::Io { .. } => DgmStatus::Io,
        Error::Format { .. }
        | Error::TooManyMalformedRows { .. }
        | Error::Snapshot(_)
        | Error::Json(_) => DgmStatus::Format,
        Error::InvalidParameter(_)
        | Error::InvalidFraction(_)
        | Error::InvalidSpec(_)
        | Error::ModeMismatch(_) => DgmStatus::InvalidArgument,
        _ => DgmStatus::Graph,
    }
}

fn fail(err: Error) -> DgmStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

/// Runs `f`, converting panics into `DgmStatus::Panic`.
fn guard(f: impl FnOnce() -> DgmStatus) -> DgmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            DgmStatus::Panic
        }
    }
}

unsafe fn path_arg(p: *const c_char, name: &str) -> Result<PathBuf, DgmStatus> {
    if p.is_null() {
        set_error(format!("{name} is null"));
        return Err(DgmStatus::NullPointer);
    }
    match CStr::from_ptr(p).to_str() {
        Ok(s) => Ok(PathBuf::from(s)),
        Err(_) => {
            set_error(format!("{name} is not valid UTF-8"));
            Err(DgmStatus::InvalidArgument)
        }
    }
}

unsafe fn graph_ref<'a>(g: *const DgmGraph) -> Result<&'a DependencyGraph, DgmStatus> {
    if g.is_null() {
        set_error("graph handle is null");
        return Err(DgmStatus::NullPointer);
    }
    Ok(&(*g).inner)
}

unsafe fn store(out: *mut *mut DgmGraph, graph: DependencyGraph) -> DgmStatus {
    *out = Box::into_raw(Box::new(DgmGraph { inner: graph }));
    DgmStatus::Ok
}

unsafe fn out_buffer<'a, T>(
    buf: *mut T,
    len: usize,
    needed: usize,
) -> Result<&'a mut [T], DgmStatus> {
    if buf.is_null() && needed > 0 {
        set_error("output buffer is null");
        return Err(DgmStatus::NullPointer);
    }
    if len < needed {
        set_error(format!("output buffer holds {len} elements, need {needed}"));
        return Err(DgmStatus::BufferTooSmall);
    }
    if needed == 0 {
        return Ok(&mut []);
    }
    Ok(std::slice::from_raw_parts_mut(buf, needed))
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

macro_rules! core {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(err) => return fail(err),
        }
    };
}

#[no_mangle]
pub extern "C" fn dgm_abi_version() -> u32 {
    DGM_ABI_VERSION
}

/// Message for the last failing call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dgm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Loads `nodes` and `edges` CSV files. `relaxed_kinds` accepts edges that
/// break the artifact/release endpoint rule.
///
/// # Safety
/// `nodes` and `edges` must be NUL-terminated strings; `out` must be a valid
/// pointer to write the new handle to.
#[no_mangle]
pub unsafe extern "C" fn dgm_graph_load_csv(
    nodes: *const c_char,
    edges: *const c_char,
    relaxed_kinds: bool,
    out: *mut *mut DgmGraph,
) -> DgmStatus {
    guard(|| {
        if out.is_null() {
            set_error("out is null");
            return DgmStatus::NullPointer;
        }
        let nodes = tri!(path_arg(nodes, "nodes"));
        let edges = tri!(path_arg(edges, "edges"));
        let (graph, _) = core!(ingest::load_csv_with(
            &nodes,
            &edges,
            LoadOptions { relaxed_kinds }
        ));
        store(out, graph)
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dgm_graph_load_snapshot(
    path: *const c_char,
    out: *mut *mut DgmGraph,
) -> DgmStatus {
    guard(|| {
        if out.is_null() {
            set_error("out is null");
            return DgmStatus::NullPointer;
        }
        let path = tri!(path_arg(path, "path"));
        store(out, core!(snapshot::load(&path)))
    })
}

/// # Safety
/// `graph` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn dgm_graph_save_snapshot(
    graph: *const DgmGraph,
    path: *const c_char,
) -> DgmStatus {
    guard(|| {
        let g = tri!(graph_ref(graph));
        let path = tri!(path_arg(path, "path"));
        core!(snapshot::save(g, &path));
        DgmStatus::Ok
    })
}

unsafe fn generate(
    family: Family,
    seed: u64,
    bidirected: bool,
    out: *mut *mut DgmGraph,
) -> DgmStatus {
    guard(|| {
        if out.is_null() {
            set_error("out is null");
            return DgmStatus::NullPointer;
        }
        let spec = GeneratorSpec {
            family,
            seed,
            orientation: if bidirected {
                Orientation::Bidirected
            } else {
                Orientation::Directed
            },
        };
        store(out, core!(synth::generate(&spec)))
    })
}

/// Barabási–Albert graph on `n` nodes with `m` edges per new node.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dgm_synth_preferential_attachment(
    n: usize,
    m: usize,
    seed: u64,
    bidirected: bool,
    out: *mut *mut DgmGraph,
) -> DgmStatus {
    generate(
        Family::PreferentialAttachment { n, m },
        seed,
        bidirected,
        out,
    )
}

/// G(n, p).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dgm_synth_uniform_random(
    n: usize,
    p: f64,
    seed: u64,
    bidirected: bool,
    out: *mut *mut DgmGraph,
) -> DgmStatus {
    generate(Family::UniformRandom { n, p }, seed, bidirected, out)
}

/// Watts–Strogatz ring lattice of degree `k` rewired with probability `beta`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dgm_synth_rewired_lattice(
    n: usize,
    k: usize,
    beta: f64,
    seed: u64,
    bidirected: bool,
    out: *mut *mut DgmGraph,
) -> DgmStatus {
    generate(Family::RewiredLattice { n, k, beta }, seed, bidirected, out)
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `graph` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dgm_graph_free(graph: *mut DgmGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Node count, or 0 for a NULL handle.
///
/// # Safety
/// `graph` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dgm_graph_node_count(graph: *const DgmGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.inner.node_count())
}

/// Edge count, or 0 for a NULL handle.
///
/// # Safety
/// `graph` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dgm_graph_edge_count(graph: *const DgmGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.inner.edge_count())
}

/// Copies the id of node `index` into `buf` with a trailing NUL. `needed`
/// (optional) receives the required size including the NUL; a `buf_len`
/// that is too small yields `BufferTooSmall` without writing.
///
/// # Safety
/// `graph` must be a live handle; `buf` must hold `buf_len` bytes; `needed`
/// must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn dgm_graph_node_id(
    graph: *const DgmGraph,
    index: usize,
    buf: *mut c_char,
    buf_len: usize,
    needed: *mut usize,
) -> DgmStatus {
    guard(|| {
        let g = tri!(graph_ref(graph));
        if index >= g.node_count() {
            set_error(format!(
                "node index {index} out of range ({} nodes)",
                g.node_count()
            ));
            return DgmStatus::InvalidArgument;
        }
        let id = g.id(index).as_bytes();
        if !needed.is_null() {
            *needed = id.len() + 1;
        }
        let dst = tri!(out_buffer(buf as *mut u8, buf_len, id.len() + 1));
        dst[..id.len()].copy_from_slice(id);
        dst[id.len()] = 0;
        DgmStatus::Ok
    })
}

/// Index of the node with id `id`, or `InvalidArgument` if absent.
///
/// # Safety
/// `graph` must be a live handle, `id` a NUL-terminated string, `index`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn dgm_graph_index_of(
    graph: *const DgmGraph,
    id: *const c_char,
    index: *mut usize,
) -> DgmStatus {
    guard(|| {
        let g = tri!(graph_ref(graph));
        if id.is_null() || index.is_null() {
            set_error("id or index is null");
            return DgmStatus::NullPointer;
        }
        let Ok(id) = CStr::from_ptr(id).to_str() else {
            set_error("id is not valid UTF-8");
            return DgmStatus::InvalidArgument;
        };
        match g.index_of(id) {
            Some(v) => {
                *index = v;
                DgmStatus::Ok
            }
            None => {
                set_error(format!("unknown node {id:?}"));
                DgmStatus::InvalidArgument
            }
        }
    })
}

/// BFS sample from the `k` most depended-upon artifacts.
///
/// # Safety
/// `graph` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dgm_graph_sample(
    graph: *const DgmGraph,
    k: usize,
    depth: usize,
    direction: DgmDirection,
    out: *mut *mut DgmGraph,
) -> DgmStatus {
    guard(|| {
        let g = tri!(graph_ref(graph));
        if out.is_null() {
            set_error("out is null");
            return DgmStatus::NullPointer;
        }
        let spec = SampleSpec {
            k,
            depth,
            direction: match direction {
                DgmDirection::Forward => Direction::Forward,
                DgmDirection::Reverse => Direction::Reverse,
                DgmDirection::Both => Direction::Both,
            },
        };
        core!(spec.validate());
        let seeds = ingest::select_top_seeds(g, k);
        store(out, core!(ingest::bfs_sample(g, &seeds, &spec)))
    })
}

/// PageRank scores into `scores[0..node_count]`. Returns `NotConverged`
/// (with the buffer filled) when `max_iter` is reached first.
///
/// # Safety
/// `graph` must be a live handle; `scores` must hold `len` doubles;
/// `iterations` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn dgm_pagerank(
    graph: *const DgmGraph,
    alpha: f64,
    tol: f64,
    max_iter: usize,
    scores: *mut f64,
    len: usize,
    iterations: *mut usize,
) -> DgmStatus {
    guard(|| {
        let g = tri!(graph_ref(graph));
        let dst = tri!(out_buffer(scores, len, g.node_count()));
        let pr = core!(pagerank(
            g,
            PageRankParams {
                alpha,
                tol,
                max_iter
            }
        ));
        dst.copy_from_slice(&pr.scores.scores);
        if !iterations.is_null() {
            *iterations = pr.iterations;
        }
        if pr.converged {
            DgmStatus::Ok
        } else {
            set_error(format!(
                "no convergence in {max_iter} iterations (delta {:e})",
                pr.last_delta
            ));
            DgmStatus::NotConverged
        }
    })
}

/// Betweenness into `scores[0..node_count]`: exact when `pivots` is 0,
/// otherwise estimated from `pivots` seeded BFS sources.
///
/// # Safety
/// `graph` must be a live handle; `scores` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dgm_betweenness(
    graph: *const DgmGraph,
    pivots: usize,
    seed: u64,
    normalized: bool,
    scores: *mut f64,
    len: usize,
) -> DgmStatus {
    guard(|| {
        let g = tri!(graph_ref(graph));
        let dst = tri!(out_buffer(scores, len, g.node_count()));
        let bc = if pivots == 0 {
            betweenness_exact(g)
        } else {
            core!(betweenness_sampled(g, pivots, seed))
        };
        let src = if normalized { &bc.normalized } else { &bc.raw };
        dst.copy_from_slice(&src.scores);
        DgmStatus::Ok
    })
}

/// Component labels into `labels[0..node_count]`; label 0 is the largest
/// component. `count` (optional) receives the number of components.
///
/// # Safety
/// `graph` must be a live handle; `labels` must hold `len` elements;
/// `count` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn dgm_components(
    graph: *const DgmGraph,
    strong: bool,
    labels: *mut u32,
    len: usize,
    count: *mut usize,
) -> DgmStatus {
    guard(|| {
        let g = tri!(graph_ref(graph));
        let dst = tri!(out_buffer(labels, len, g.node_count()));
        let mode = if strong {
            ComponentMode::Strong
        } else {
            ComponentMode::Weak
        };
        let c = connected_components(g, mode);
        dst.copy_from_slice(&c.labels);
        if !count.is_null() {
            *count = c.count();
        }
        DgmStatus::Ok
    })
}
