/* Exercises the C API end to end: generate, recover, score, free. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>

#include "splp.h"

#define CHECK(call)                                                        \
    do {                                                                   \
        SplpStatus st_ = (call);                                           \
        if (st_ != SPLP_STATUS_OK) {                                       \
            char msg_[256];                                                \
            splp_last_error_message(msg_, sizeof msg_);                    \
            fprintf(stderr, "%s failed (%d): %s\n", #call, (int)st_, msg_); \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(void) {
    enum { N = 120, K = 3 };
    const double b[K * K] = {0.9, 0.0, 0.0, 0.0, 0.8, 0.0, 0.0, 0.0, 0.7};
    double theta[N * K];
    double theta_hat[N * K];
    size_t anchors[K];
    SplpGraph *graph = NULL;
    SplpRecovery *rec = NULL;
    size_t n = 0, k = 0;
    double err = -1.0;
    uint64_t min_n = 0;

    CHECK(splp_graph_generate(N, K, 0.5, b, SPLP_MODE_EXACT, 0, 7, theta, &graph));
    if (splp_graph_node_count(graph) != N) return 1;
    CHECK(splp_recover(graph, K, SPLP_MODE_EXACT, 7, &rec));
    CHECK(splp_recovery_dims(rec, &n, &k));
    if (n != N || k != K) return 1;
    CHECK(splp_recovery_copy_theta(rec, theta_hat, N * K));
    CHECK(splp_recovery_copy_anchors(rec, anchors, K));
    for (size_t j = 0; j < K; j++)
        if (anchors[j] == SPLP_NO_ANCHOR || anchors[j] >= N) return 1;
    CHECK(splp_entrywise_error(theta_hat, theta, N, K, &err));
    if (!(err >= 0.0 && err < 0.2)) return 1;

    if (splp_recovery_copy_theta(rec, theta_hat, 1) != SPLP_STATUS_BUFFER_TOO_SMALL) return 1;
    if (splp_recover(NULL, K, SPLP_MODE_EXACT, 0, &rec) != SPLP_STATUS_NULL_POINTER) return 1;

    CHECK(splp_min_nodes(2, 1.0, 1.0, 0.1, 0.01, &min_n));
    if (min_n != 299) return 1;

    splp_recovery_free(rec);
    splp_graph_free(graph);
    printf("ok %s %.3e\n", splp_version(), err);
    return 0;
}
