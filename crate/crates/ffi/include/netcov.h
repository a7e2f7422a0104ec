#ifndef NETCOV_H
#define NETCOV_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NetcovStatus {
  NETCOV_STATUS_OK = 0,
  /**
   * Null pointer, non-UTF-8 text or out-of-range value.
   */
  NETCOV_STATUS_INVALID_ARGUMENT = 1,
  /**
   * Malformed input document or failed validation.
   */
  NETCOV_STATUS_INVALID_INPUT = 2,
  /**
   * Singular system or failed factorization.
   */
  NETCOV_STATUS_NUMERICAL = 3,
  /**
   * Internal panic caught at the boundary.
   */
  NETCOV_STATUS_INTERNAL = 4,
} NetcovStatus;

typedef enum NetcovKernel {
  NETCOV_KERNEL_EXPONENTIAL = 0,
  NETCOV_KERNEL_SPHERICAL = 1,
  NETCOV_KERNEL_LINEAR_SILL = 2,
} NetcovKernel;

typedef enum NetcovMethod {
  NETCOV_METHOD_CLOSED_FORM = 0,
  NETCOV_METHOD_PATH_SUM = 1,
} NetcovMethod;

/**
 * Dense matrix of doubles.
 */
typedef struct NetcovMatrix NetcovMatrix;

/**
 * Directed network with its solved Markov chain.
 */
typedef struct NetcovNetwork NetcovNetwork;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Owned by the library;
 * valid until the next failing call on the same thread.
 */
const char *netcov_last_error_message(void);

/**
 * Builds a network from grid CSV text (`ix,iy,x,y,u,v,value[,water]`).
 *
 * # Safety
 * `csv` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum NetcovStatus netcov_network_from_grid_csv(const char *csv, struct NetcovNetwork **out);

/**
 * Parses a network JSON document.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum NetcovStatus netcov_network_from_json(const char *json, struct NetcovNetwork **out);

/**
 * Serializes a network to JSON. Release the string with [`netcov_string_free`].
 *
 * # Safety
 * `net` must be a live handle and `out` a valid pointer.
 */
enum NetcovStatus netcov_network_to_json(const struct NetcovNetwork *net, char **out);

/**
 * Number of vertices, or 0 for a null handle.
 *
 * # Safety
 * `net` must be null or a live handle.
 */
size_t netcov_network_vertex_count(const struct NetcovNetwork *net);

/**
 * Network covariance matrix. `max_hops = 0` selects the default hop limit
 * for path enumeration; `weight_floor` prunes low-weight paths.
 *
 * # Safety
 * `net` must be a live handle and `out` a valid pointer.
 */
enum NetcovStatus netcov_covariance(const struct NetcovNetwork *net,
                                    enum NetcovKernel kernel,
                                    double sill,
                                    double range,
                                    enum NetcovMethod method,
                                    size_t max_hops,
                                    double weight_floor,
                                    struct NetcovMatrix **out);

/**
 * Draws `m` realizations of a Gaussian field with constant `mean` and
 * covariance `cov`; the result has one realization per row.
 *
 * # Safety
 * `cov` must be a live handle and `out` a valid pointer.
 */
enum NetcovStatus netcov_sample_gaussian(const struct NetcovMatrix *cov,
                                         double mean,
                                         size_t m,
                                         uint64_t seed,
                                         struct NetcovMatrix **out);

/**
 * # Safety
 * `m` must be null or a live handle.
 */
size_t netcov_matrix_rows(const struct NetcovMatrix *m);

/**
 * # Safety
 * `m` must be null or a live handle.
 */
size_t netcov_matrix_cols(const struct NetcovMatrix *m);

/**
 * Copies the matrix row-major into `buf`, which must hold `len >= rows * cols` doubles.
 *
 * # Safety
 * `m` must be a live handle and `buf` valid for `len` writes.
 */
enum NetcovStatus netcov_matrix_copy(const struct NetcovMatrix *m, double *buf, size_t len);

/**
 * # Safety
 * `net` must be null or a handle not yet freed.
 */
void netcov_network_free(struct NetcovNetwork *net);

/**
 * # Safety
 * `m` must be null or a handle not yet freed.
 */
void netcov_matrix_free(struct NetcovMatrix *m);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void netcov_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NETCOV_H */
