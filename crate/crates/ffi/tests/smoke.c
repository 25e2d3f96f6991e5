#include <stdio.h>
#include <stdlib.h>
#include "dgm.h"

int main(void) {
    DgmGraph *g = NULL;
    if (dgm_abi_version() != 1) return 10;
    if (dgm_synth_preferential_attachment(500, 3, 42, false, &g) != DGM_STATUS_OK) return 11;
    size_t n = dgm_graph_node_count(g);
    double *pr = malloc(n * sizeof(double));
    uint32_t *labels = malloc(n * sizeof(uint32_t));
    size_t iters = 0, count = 0;
    if (dgm_pagerank(g, 0.85, 1e-10, 200, pr, n, &iters) != DGM_STATUS_OK) return 12;
    double sum = 0;
    for (size_t i = 0; i < n; i++) sum += pr[i];
    if (dgm_components(g, false, labels, n, &count) != DGM_STATUS_OK) return 13;
    if (dgm_betweenness(g, 0, 0, false, pr, n - 1) != DGM_STATUS_BUFFER_TOO_SMALL) return 14;
    printf("nodes=%zu edges=%zu sum=%.12f wcc=%zu err=%s\n", n, dgm_graph_edge_count(g), sum, count,
           dgm_last_error());
    free(pr);
    free(labels);
    dgm_graph_free(g);
    return 0;
}
