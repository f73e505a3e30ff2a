#ifndef SIMTRI_H
#define SIMTRI_H

/* Generated by cbindgen; do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum SimtriStatus {
  SIMTRI_STATUS_OK = 0,
  SIMTRI_STATUS_NULL_POINTER = 1,
  SIMTRI_STATUS_INVALID_ARGUMENT = 2,
  // A similarity or threshold outside `[-1, 1]`, or NaN.
  SIMTRI_STATUS_DOMAIN = 3,
  SIMTRI_STATUS_DIMENSION_MISMATCH = 4,
  // Zero, empty or non-finite vector.
  SIMTRI_STATUS_INVALID_VECTOR = 5,
  // File could not be read or written.
  SIMTRI_STATUS_IO = 6,
  // Malformed, tampered or unsupported index file.
  SIMTRI_STATUS_FORMAT = 7,
  // An internal panic was caught at the boundary.
  SIMTRI_STATUS_PANIC = 8,
} SimtriStatus;

typedef enum SimtriBound {
  SIMTRI_BOUND_EUCLIDEAN = 0,
  SIMTRI_BOUND_EUCL_LB = 1,
  SIMTRI_BOUND_ARCCOS = 2,
  SIMTRI_BOUND_MULT = 3,
  SIMTRI_BOUND_MULT_VARIANT = 4,
  SIMTRI_BOUND_MULT_LB1 = 5,
  SIMTRI_BOUND_MULT_LB2 = 6,
} SimtriBound;

// A VP-tree or pivot-table index over normalized vectors.
typedef struct SimtriIndex SimtriIndex;

// Query answer, ordered by similarity descending then id ascending.
typedef struct SimtriResults SimtriResults;

// Work counters for one query.
typedef struct SimtriStats {
  size_t sims_computed;
  size_t nodes_pruned;
  size_t candidates_filtered;
} SimtriStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null after a success.
// The pointer stays valid until the next call into this library on the same
// thread.
const char *simtri_last_error_message(void);

// Cosine similarity of two dense vectors of length `dim`.
//
// # Safety
// `a` and `b` must be valid for `dim` reads; `out` must be writable.
enum SimtriStatus simtri_cosine_dense(const double *a, const double *b, size_t dim, double *out);

// Cosine similarity of two sparse vectors given as parallel index/value
// arrays with strictly increasing indices.
//
// # Safety
// Each index/value array must be valid for its `nnz` reads; `out` must be
// writable.
enum SimtriStatus simtri_cosine_sparse(const uint32_t *a_idx,
                                       const double *a_val,
                                       size_t a_nnz,
                                       const uint32_t *b_idx,
                                       const double *b_val,
                                       size_t b_nnz,
                                       double *out);

// Lower bound on `sim(x, y)` given `s1 = sim(x, z)` and `s2 = sim(z, y)`.
//
// # Safety
// `out` must be writable.
enum SimtriStatus simtri_lower_bound(enum SimtriBound bound, double s1, double s2, double *out);

// Upper bound on `sim(x, y)` given `s1 = sim(x, z)` and `s2 = sim(z, y)`.
//
// # Safety
// `out` must be writable.
enum SimtriStatus simtri_upper_bound(double s1, double s2, double *out);

// Builds a VP-tree over a row-major `n x dim` matrix.
//
// # Safety
// `data` must be valid for `n * dim` reads; `out` must be writable.
enum SimtriStatus simtri_vp_build(const double *data,
                                  size_t n,
                                  size_t dim,
                                  size_t leaf_capacity,
                                  uint64_t seed,
                                  struct SimtriIndex **out);

// Builds a pivot table with `pivots` farthest-first pivots.
//
// # Safety
// `data` must be valid for `n * dim` reads; `out` must be writable.
enum SimtriStatus simtri_laesa_build(const double *data,
                                     size_t n,
                                     size_t dim,
                                     size_t pivots,
                                     uint64_t seed,
                                     struct SimtriIndex **out);

// Loads an index written by [`simtri_index_save`] or the command-line tool.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum SimtriStatus simtri_index_load(const char *path, struct SimtriIndex **out);

// # Safety
// `index` must be a live handle; `path` a NUL-terminated string.
enum SimtriStatus simtri_index_save(const struct SimtriIndex *index, const char *path);

// Number of indexed vectors; 0 for a null handle.
//
// # Safety
// `index` must be null or a live handle.
size_t simtri_index_len(const struct SimtriIndex *index);

// All indexed vectors with similarity at least `tau` to `q`.
//
// # Safety
// `index` must be a live handle, `q` valid for `dim` reads and `out`
// writable.
enum SimtriStatus simtri_index_range(const struct SimtriIndex *index,
                                     const double *q,
                                     size_t dim,
                                     double tau,
                                     struct SimtriResults **out);

// The `k` indexed vectors most similar to `q`.
//
// # Safety
// `index` must be a live handle, `q` valid for `dim` reads and `out`
// writable.
enum SimtriStatus simtri_index_knn(const struct SimtriIndex *index,
                                   const double *q,
                                   size_t dim,
                                   size_t k,
                                   struct SimtriResults **out);

// # Safety
// `results` must be null or a live handle.
size_t simtri_results_len(const struct SimtriResults *results);

// Writes the `i`-th hit. Either output pointer may be null.
//
// # Safety
// `results` must be a live handle; non-null outputs must be writable.
enum SimtriStatus simtri_results_get(const struct SimtriResults *results,
                                     size_t i,
                                     size_t *id,
                                     double *sim);

// # Safety
// `results` must be a live handle; `out` writable.
enum SimtriStatus simtri_results_stats(const struct SimtriResults *results,
                                       struct SimtriStats *out);

// # Safety
// `results` must be null or a handle not yet freed.
void simtri_results_free(struct SimtriResults *results);

// # Safety
// `index` must be null or a handle not yet freed.
void simtri_index_free(struct SimtriIndex *index);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SIMTRI_H */
