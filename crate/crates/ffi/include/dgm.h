#ifndef DGM_H
#define DGM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Bumped whenever a signature or struct layout in `dgm.h` changes.
 */
#define DGM_ABI_VERSION 1

typedef enum {
  DGM_DIRECTION_FORWARD = 0,
  DGM_DIRECTION_REVERSE = 1,
  DGM_DIRECTION_BOTH = 2,
} DgmDirection;

typedef enum {
  DGM_STATUS_OK = 0,
  DGM_STATUS_NULL_POINTER = 1,
  DGM_STATUS_INVALID_ARGUMENT = 2,
  DGM_STATUS_IO = 3,
  DGM_STATUS_FORMAT = 4,
  DGM_STATUS_GRAPH = 5,
  DGM_STATUS_NOT_CONVERGED = 6,
  DGM_STATUS_BUFFER_TOO_SMALL = 7,
  DGM_STATUS_PANIC = 8,
} DgmStatus;

/**
 * Opaque graph handle.
 */
typedef struct DgmGraph DgmGraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

uint32_t dgm_abi_version(void);

/**
 * Message for the last failing call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *dgm_last_error(void);

/**
 * Loads `nodes` and `edges` CSV files. `relaxed_kinds` accepts edges that
 * break the artifact/release endpoint rule.
 *
 * # Safety
 * `nodes` and `edges` must be NUL-terminated strings; `out` must be a valid
 * pointer to write the new handle to.
 */
DgmStatus dgm_graph_load_csv(const char *nodes,
                             const char *edges,
                             bool relaxed_kinds,
                             DgmGraph **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` a valid pointer.
 */
DgmStatus dgm_graph_load_snapshot(const char *path, DgmGraph **out);

/**
 * # Safety
 * `graph` must be a live handle; `path` a NUL-terminated string.
 */
DgmStatus dgm_graph_save_snapshot(const DgmGraph *graph, const char *path);

/**
 * Barabási–Albert graph on `n` nodes with `m` edges per new node.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
DgmStatus dgm_synth_preferential_attachment(size_t n,
                                            size_t m,
                                            uint64_t seed,
                                            bool bidirected,
                                            DgmGraph **out);

/**
 * G(n, p).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
DgmStatus dgm_synth_uniform_random(size_t n,
                                   double p,
                                   uint64_t seed,
                                   bool bidirected,
                                   DgmGraph **out);

/**
 * Watts–Strogatz ring lattice of degree `k` rewired with probability `beta`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
DgmStatus dgm_synth_rewired_lattice(size_t n,
                                    size_t k,
                                    double beta,
                                    uint64_t seed,
                                    bool bidirected,
                                    DgmGraph **out);

/**
 * Releases a handle. NULL is ignored.
 *
 * # Safety
 * `graph` must be NULL or a handle not yet freed.
 */
void dgm_graph_free(DgmGraph *graph);

/**
 * Node count, or 0 for a NULL handle.
 *
 * # Safety
 * `graph` must be NULL or a live handle.
 */
size_t dgm_graph_node_count(const DgmGraph *graph);

/**
 * Edge count, or 0 for a NULL handle.
 *
 * # Safety
 * `graph` must be NULL or a live handle.
 */
size_t dgm_graph_edge_count(const DgmGraph *graph);

/**
 * Copies the id of node `index` into `buf` with a trailing NUL. `needed`
 * (optional) receives the required size including the NUL; a `buf_len`
 * that is too small yields `BufferTooSmall` without writing.
 *
 * # Safety
 * `graph` must be a live handle; `buf` must hold `buf_len` bytes; `needed`
 * must be NULL or writable.
 */
DgmStatus dgm_graph_node_id(const DgmGraph *graph,
                            size_t index,
                            char *buf,
                            size_t buf_len,
                            size_t *needed);

/**
 * Index of the node with id `id`, or `InvalidArgument` if absent.
 *
 * # Safety
 * `graph` must be a live handle, `id` a NUL-terminated string, `index`
 * writable.
 */
DgmStatus dgm_graph_index_of(const DgmGraph *graph, const char *id, size_t *index);

/**
 * BFS sample from the `k` most depended-upon artifacts.
 *
 * # Safety
 * `graph` must be a live handle; `out` a valid pointer.
 */
DgmStatus dgm_graph_sample(const DgmGraph *graph,
                           size_t k,
                           size_t depth,
                           DgmDirection direction,
                           DgmGraph **out);

/**
 * PageRank scores into `scores[0..node_count]`. Returns `NotConverged`
 * (with the buffer filled) when `max_iter` is reached first.
 *
 * # Safety
 * `graph` must be a live handle; `scores` must hold `len` doubles;
 * `iterations` must be NULL or writable.
 */
DgmStatus dgm_pagerank(const DgmGraph *graph,
                       double alpha,
                       double tol,
                       size_t max_iter,
                       double *scores,
                       size_t len,
                       size_t *iterations);

/**
 * Betweenness into `scores[0..node_count]`: exact when `pivots` is 0,
 * otherwise estimated from `pivots` seeded BFS sources.
 *
 * # Safety
 * `graph` must be a live handle; `scores` must hold `len` doubles.
 */
DgmStatus dgm_betweenness(const DgmGraph *graph,
                          size_t pivots,
                          uint64_t seed,
                          bool normalized,
                          double *scores,
                          size_t len);

/**
 * Component labels into `labels[0..node_count]`; label 0 is the largest
 * component. `count` (optional) receives the number of components.
 *
 * # Safety
 * `graph` must be a live handle; `labels` must hold `len` elements;
 * `count` must be NULL or writable.
 */
DgmStatus dgm_components(const DgmGraph *graph,
                         bool strong,
                         uint32_t *labels,
                         size_t len,
                         size_t *count);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DGM_H */
