#ifndef CONTAGION_H
#define CONTAGION_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum ContagionStatus {
  CONTAGION_STATUS_OK = 0,
  CONTAGION_STATUS_NULL_POINTER = 1,
  CONTAGION_STATUS_DOMAIN = 2,
  CONTAGION_STATUS_INAPPLICABLE = 3,
  CONTAGION_STATUS_NON_CONVERGENCE = 4,
  CONTAGION_STATUS_NON_MONOTONE = 5,
  CONTAGION_STATUS_TOO_LARGE = 6,
  CONTAGION_STATUS_IO = 7,
  CONTAGION_STATUS_PARSE = 8,
  CONTAGION_STATUS_BUFFER_TOO_SMALL = 9,
  CONTAGION_STATUS_PANIC = 10,
} ContagionStatus;

typedef enum ContagionBankStatus {
  CONTAGION_BANK_STATUS_SAFE = 0,
  CONTAGION_BANK_STATUS_CRITICAL = 1,
  CONTAGION_BANK_STATUS_FAILED = 2,
  CONTAGION_BANK_STATUS_SHOCKED = 3,
  CONTAGION_BANK_STATUS_ISOLATED = 4,
} ContagionBankStatus;

/**
 * Degree law used by the mean-field calls.
 */
typedef enum ContagionFamily {
  /**
   * Poisson degrees with mean `z`.
   */
  CONTAGION_FAMILY_ER = 0,
  /**
   * Scale-free degrees with `m = z / 2`.
   */
  CONTAGION_FAMILY_BA = 1,
} ContagionFamily;

/**
 * Opaque clearing outcome.
 */
typedef struct ContagionClearing ContagionClearing;

/**
 * Opaque loan network.
 */
typedef struct ContagionGraph ContagionGraph;

/**
 * Financial parameters. Ratios are fractions, not percentages.
 */
typedef struct ContagionParams {
  double external_rate;
  double interbank_rate;
  double liquidity;
  double leverage;
  double shocked_rate;
} ContagionParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *contagion_last_error(void);

/**
 * `R = 1.02`, `r = 1.01`, `f = 0.5`, `Λ = 0.03`, shocked return 0.
 */
struct ContagionParams contagion_params_standard(void);

/**
 * First and second critical degrees. `*k2_defined` is false (and `*k2`
 * NaN) where the second-shell closed form does not apply.
 *
 * # Safety
 * All pointers must be valid for the access they imply.
 */
enum ContagionStatus contagion_critical_degrees(const struct ContagionParams *params,
                                                double *k1,
                                                double *k2,
                                                bool *k2_defined);

/**
 * Erdős–Rényi network with mean degree `z`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum ContagionStatus contagion_graph_er(size_t n,
                                        double z,
                                        uint64_t seed,
                                        bool directed,
                                        struct ContagionGraph **out);

/**
 * Barabási–Albert network, `m` links per new node.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum ContagionStatus contagion_graph_ba(size_t n,
                                        size_t m,
                                        uint64_t seed,
                                        struct ContagionGraph **out);

/**
 * Directed Barabási–Albert network; each loan is reciprocated with
 * probability `reciprocity`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum ContagionStatus contagion_graph_ba_directed(size_t n,
                                                 size_t m,
                                                 uint64_t seed,
                                                 double reciprocity,
                                                 struct ContagionGraph **out);

/**
 * Cayley tree of degree `k` and the given depth; node 0 is the root.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum ContagionStatus contagion_graph_cayley(size_t k, size_t depth, struct ContagionGraph **out);

/**
 * Network from `count` loans `lenders[i] -> borrowers[i]` of size `weights[i]`.
 *
 * # Safety
 * The three arrays must hold `count` elements; `out` must be valid for writes.
 */
enum ContagionStatus contagion_graph_from_edges(size_t node_count,
                                                const size_t *lenders,
                                                const size_t *borrowers,
                                                const double *weights,
                                                size_t count,
                                                bool directed,
                                                struct ContagionGraph **out);

/**
 * Reads an edge-list file (`#nodes N directed {0,1}` header).
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum ContagionStatus contagion_graph_read(const char *path, struct ContagionGraph **out);

/**
 * Number of banks; 0 for a null handle.
 *
 * # Safety
 * `graph` must be null or a live handle.
 */
size_t contagion_graph_node_count(const struct ContagionGraph *graph);

/**
 * Number of directed loans (an undirected link counts twice).
 *
 * # Safety
 * `graph` must be null or a live handle.
 */
size_t contagion_graph_loan_count(const struct ContagionGraph *graph);

/**
 * # Safety
 * `graph` must be null or a handle not yet freed.
 */
void contagion_graph_free(struct ContagionGraph *graph);

/**
 * Shocks bank `shocked` and solves the clearing problem with standard
 * sheets built from the graph.
 *
 * # Safety
 * `graph` and `params` must be live; `out` must be valid for writes.
 */
enum ContagionStatus contagion_clear(const struct ContagionGraph *graph,
                                     const struct ContagionParams *params,
                                     size_t shocked,
                                     struct ContagionClearing **out);

/**
 * # Safety
 * `clearing` must be null or a live handle.
 */
size_t contagion_clearing_bank_count(const struct ContagionClearing *clearing);

/**
 * Induced failures `F`, excluding the shocked bank.
 *
 * # Safety
 * `clearing` must be null or a live handle.
 */
size_t contagion_clearing_failures(const struct ContagionClearing *clearing);

/**
 * # Safety
 * `clearing` must be null or a live handle.
 */
size_t contagion_clearing_iterations(const struct ContagionClearing *clearing);

/**
 * Copies the repayment vector `x` into `out[0..bank_count]`.
 *
 * # Safety
 * `clearing` must be live and `out` valid for `len` writes.
 */
enum ContagionStatus contagion_clearing_repayments(const struct ContagionClearing *clearing,
                                                   double *out,
                                                   size_t len);

/**
 * Copies the updated net worths `K'` into `out[0..bank_count]`.
 *
 * # Safety
 * `clearing` must be live and `out` valid for `len` writes.
 */
enum ContagionStatus contagion_clearing_net_worths(const struct ContagionClearing *clearing,
                                                   double *out,
                                                   size_t len);

/**
 * Status of bank `bank`.
 *
 * # Safety
 * `clearing` must be live and `out` valid for writes.
 */
enum ContagionStatus contagion_clearing_status(const struct ContagionClearing *clearing,
                                               size_t bank,
                                               enum ContagionBankStatus *out);

/**
 * # Safety
 * `clearing` must be null or a handle not yet freed.
 */
void contagion_clearing_free(struct ContagionClearing *clearing);

/**
 * Exact shell solution on the infinite Cayley tree of degree `k`: number of
 * failing shells and induced failures.
 *
 * # Safety
 * Pointers must be valid.
 */
enum ContagionStatus contagion_tree_solve(size_t k,
                                          const struct ContagionParams *params,
                                          size_t max_depth,
                                          size_t *failed_shells,
                                          uint64_t *failures);

/**
 * Mean-field expected number of failures.
 *
 * # Safety
 * Pointers must be valid.
 */
enum ContagionStatus contagion_mf_mean(enum ContagionFamily family,
                                       double z,
                                       const struct ContagionParams *params,
                                       double *out);

/**
 * Mean-field `P(F)` for `F = 0..len` written to `out`.
 *
 * # Safety
 * `params` must be valid and `out` valid for `len` writes.
 */
enum ContagionStatus contagion_mf_distribution(enum ContagionFamily family,
                                               double z,
                                               const struct ContagionParams *params,
                                               double *out,
                                               size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONTAGION_H */
