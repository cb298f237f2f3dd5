#ifndef SPLP_H
#define SPLP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/** Anchor slot value for a community without an anchor. */
#define SPLP_NO_ANCHOR SIZE_MAX



/**
 * Result code of every fallible call.
 */
typedef enum SplpStatus {
  SPLP_STATUS_OK = 0,
  SPLP_STATUS_NULL_POINTER = 1,
  SPLP_STATUS_INVALID_INPUT = 2,
  SPLP_STATUS_CONVERGENCE_FAILURE = 3,
  SPLP_STATUS_PARSE_ERROR = 4,
  SPLP_STATUS_IO_ERROR = 5,
  /**
   * The sample-size condition cannot be met in double precision.
   */
  SPLP_STATUS_UNSATISFIABLE = 6,
  /**
   * An output buffer is too small.
   */
  SPLP_STATUS_BUFFER_TOO_SMALL = 7,
  SPLP_STATUS_PANIC = 8,
} SplpStatus;

/**
 * Input interpretation for [`splp_recover`].
 */
typedef enum SplpMode {
  /**
   * The graph is the exact probability matrix P.
   */
  SPLP_MODE_EXACT = 0,
  /**
   * The graph is an observed adjacency; uses its top-k eigenvectors.
   */
  SPLP_MODE_SPECTRAL = 1,
} SplpMode;

/**
 * Outcome of one community's linear program.
 */
typedef enum SplpLpStatus {
  SPLP_LP_STATUS_OPTIMAL = 0,
  SPLP_LP_STATUS_INFEASIBLE = 1,
  SPLP_LP_STATUS_UNBOUNDED = 2,
  /**
   * No anchor was found, or the solver stopped without a verdict.
   */
  SPLP_LP_STATUS_NOT_SOLVED = 3,
} SplpLpStatus;

/**
 * Opaque weighted graph.
 */
typedef struct SplpGraph SplpGraph;

/**
 * Opaque recovery result.
 */
typedef struct SplpRecovery SplpRecovery;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the most recent error message of this thread into `buf` (NUL
 * terminated, truncated to `len` bytes) and returns the full message length
 * including the terminator; 0 if there is no error message. `buf` may be
 * NULL to query the length.
 *
 * # Safety
 * `buf` must be NULL or valid for `len` writable bytes.
 */
size_t splp_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *splp_version(void);

/**
 * Builds a graph from a dense symmetric `n×n` matrix with entries in
 * `[0, 1]`.
 *
 * # Safety
 * `adjacency` must point to `n*n` readable doubles; `out` must be writable.
 */
enum SplpStatus splp_graph_from_dense(size_t n, const double *adjacency, struct SplpGraph **out);

/**
 * Samples an MMSB graph. In `Exact` mode the graph is `P = ΘBΘᵀ`; in
 * `Spectral` mode it is the average of `samples` adjacency draws
 * (`samples == 0` means `⌈√n⌉`). When `theta_out` is not NULL it receives
 * the ground-truth Θ (`n*k` doubles, row-major).
 *
 * # Safety
 * `b` must point to `k*k` readable doubles; `theta_out` must be NULL or
 * valid for `n*k` writes; `out` must be writable.
 */
enum SplpStatus splp_graph_generate(size_t n,
                                    size_t k,
                                    double alpha,
                                    const double *b,
                                    enum SplpMode mode,
                                    size_t samples,
                                    uint64_t seed,
                                    double *theta_out,
                                    struct SplpGraph **out);

/**
 * Number of nodes; 0 for NULL.
 *
 * # Safety
 * `graph` must be NULL or a live handle.
 */
size_t splp_graph_node_count(const struct SplpGraph *graph);

/**
 * Copies the `n×n` adjacency into `out` (`len ≥ n*n` doubles).
 *
 * # Safety
 * `graph` must be a live handle; `out` valid for `len` writes.
 */
enum SplpStatus splp_graph_copy_adjacency(const struct SplpGraph *graph, double *out, size_t len);

/**
 * Releases a graph. NULL is ignored.
 *
 * # Safety
 * `graph` must be NULL or a handle not yet freed.
 */
void splp_graph_free(struct SplpGraph *graph);

/**
 * Runs SP+LP with `k` communities.
 *
 * # Safety
 * `graph` must be a live handle; `out` writable.
 */
enum SplpStatus splp_recover(const struct SplpGraph *graph,
                             size_t k,
                             enum SplpMode mode,
                             uint64_t seed,
                             struct SplpRecovery **out);

/**
 * Writes the dimensions `n` and `k` of the recovered Θ̂.
 *
 * # Safety
 * `rec` must be a live handle; `n` and `k` writable.
 */
enum SplpStatus splp_recovery_dims(const struct SplpRecovery *rec, size_t *n, size_t *k);

/**
 * Copies Θ̂ (row-major `n*k` doubles) into `out`.
 *
 * # Safety
 * `rec` must be a live handle; `out` valid for `len` writes.
 */
enum SplpStatus splp_recovery_copy_theta(const struct SplpRecovery *rec, double *out, size_t len);

/**
 * Copies the `k` anchor node indices; missing anchors are
 * `SPLP_NO_ANCHOR`.
 *
 * # Safety
 * `rec` must be a live handle; `out` valid for `len` writes.
 */
enum SplpStatus splp_recovery_copy_anchors(const struct SplpRecovery *rec, size_t *out, size_t len);

/**
 * Status of community `j`'s linear program.
 *
 * # Safety
 * `rec` must be a live handle; `out` writable.
 */
enum SplpStatus splp_recovery_column_status(const struct SplpRecovery *rec,
                                            size_t j,
                                            enum SplpLpStatus *out);

/**
 * 1 if every community's LP ended optimal with a normalized column, else 0
 * (also 0 for NULL).
 *
 * # Safety
 * `rec` must be NULL or a live handle.
 */
int splp_recovery_all_optimal(const struct SplpRecovery *rec);

/**
 * Releases a recovery result. NULL is ignored.
 *
 * # Safety
 * `rec` must be NULL or a handle not yet freed.
 */
void splp_recovery_free(struct SplpRecovery *rec);

/**
 * Permutation-matched entrywise error between two `n×k` row-major matrices.
 *
 * # Safety
 * `theta_hat` and `theta` must each point to `n*k` readable doubles; `out`
 * must be writable.
 */
enum SplpStatus splp_entrywise_error(const double *theta_hat,
                                     const double *theta,
                                     size_t n,
                                     size_t k,
                                     double *out);

/**
 * Regularized incomplete beta function `I_x(a, b)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum SplpStatus splp_reg_incomplete_beta(double x, double a, double b, double *out);

/**
 * Smallest `n` satisfying the sample-size condition of the recovery
 * guarantee. `epsilon <= 0` selects `0.5·min(ε₁, ε₂)`. Returns
 * `SPLP_STATUS_UNSATISFIABLE` when no `n` can be certified.
 *
 * # Safety
 * `out` must be writable.
 */
enum SplpStatus splp_min_nodes(size_t k,
                               double alpha,
                               double kappa,
                               double p,
                               double epsilon,
                               uint64_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPLP_H */
