#ifndef NETRED_H
#define NETRED_H

/* Generated by cbindgen from the netred-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 *
 * Nonzero values match the CLI exit codes for the same failure classes.
 */
typedef enum NetredStatus {
  NETRED_STATUS_OK = 0,
  /**
   * Any error not covered by a more specific code.
   */
  NETRED_STATUS_ERROR = 1,
  /**
   * The system description failed to parse.
   */
  NETRED_STATUS_PARSE = 2,
  /**
   * An enumeration budget was exceeded.
   */
  NETRED_STATUS_BUDGET = 3,
  /**
   * Arguments that are individually valid but cannot be combined.
   */
  NETRED_STATUS_INVALID_COMBINATION = 4,
  /**
   * Time integration failed.
   */
  NETRED_STATUS_INTEGRATION = 5,
  /**
   * Null pointer, bad encoding, or out-of-range argument.
   */
  NETRED_STATUS_BAD_ARGUMENT = 6,
} NetredStatus;

/**
 * MOR method selector for [`netred_pipeline_partition`].
 */
enum NetredMethod
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : uint32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  NETRED_METHOD_IRKA = 0,
  NETRED_METHOD_BALANCED_TRUNCATION = 1,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum NetredMethod NetredMethod;
#else
typedef uint32_t NetredMethod;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

/**
 * Projection-basis side selector for [`netred_pipeline_partition`].
 */
enum NetredSource
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : uint32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  NETRED_SOURCE_V = 0,
  NETRED_SOURCE_W = 1,
  /**
   * Combined left/right basis merged by SVD.
   */
  NETRED_SOURCE_VW = 2,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum NetredSource NetredSource;
#else
typedef uint32_t NetredSource;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

/**
 * Clustering algorithm selector for [`netred_pipeline_partition`].
 */
enum NetredAlgo
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : uint32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  NETRED_ALGO_QR = 0,
  NETRED_ALGO_KMEANS = 1,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum NetredAlgo NetredAlgo;
#else
typedef uint32_t NetredAlgo;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

/**
 * Opaque handle to a parsed network system.
 */
typedef struct NetredSystem NetredSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the message of the most recent failure on this thread into `buf`
 * (truncated, always NUL-terminated when `cap > 0`) and returns the full
 * message length in bytes, excluding the terminator.
 *
 * # Safety
 * `buf` must point to at least `cap` writable bytes, or be null (in which
 * case only the length is returned).
 */
size_t netred_last_error(char *buf, size_t cap);

/**
 * Parses a system description (the `netred-system v1` text format) and
 * stores a new handle in `*out`. The handle must be released with
 * [`netred_system_free`].
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum NetredStatus netred_system_from_string(const char *text, struct NetredSystem **out);

/**
 * Releases a handle created by [`netred_system_from_string`]. Null is a
 * no-op.
 *
 * # Safety
 * `sys` must be a handle returned by this library that has not been freed.
 */
void netred_system_free(struct NetredSystem *sys);

/**
 * Reports the agent count, edge count, and per-agent state dimension.
 * Any of the out pointers may be null to skip that field.
 *
 * # Safety
 * `sys` must be a live handle; non-null out pointers must be writable.
 */
enum NetredStatus netred_system_dims(const struct NetredSystem *sys,
                                     size_t *n_agents,
                                     size_t *n_edges,
                                     size_t *agent_dim);

/**
 * H2 error of the clustered reduction given by per-agent cluster labels
 * (`labels[i]` is the cluster of agent `i`; values are arbitrary tags).
 * `absolute`/`relative` may each be null to skip that output.
 *
 * # Safety
 * `sys` must be a live handle, `labels` must point to `n_labels` readable
 * values, and non-null out pointers must be writable.
 */
enum NetredStatus netred_h2_error(const struct NetredSystem *sys,
                                  const size_t *labels,
                                  size_t n_labels,
                                  double *absolute,
                                  double *relative);

/**
 * H∞ error of the clustered reduction given by per-agent cluster labels.
 * `tol` is the relative tolerance of the norm search; pass 0 for the
 * default. `absolute`/`relative` may each be null.
 *
 * # Safety
 * Same contract as [`netred_h2_error`].
 */
enum NetredStatus netred_hinf_error(const struct NetredSystem *sys,
                                    const size_t *labels,
                                    size_t n_labels,
                                    double tol,
                                    double *absolute,
                                    double *relative);

/**
 * Runs the MOR → clustering pipeline on a linear system and writes the
 * resulting per-agent cluster labels (0-based, by first appearance) to
 * `labels_out`, which must hold one value per agent. `method`, `source`,
 * and `algo` take [`NetredMethod`], [`NetredSource`], and [`NetredAlgo`]
 * values. `h2_relative`/`hinf_relative` may each be null.
 *
 * # Safety
 * `sys` must be a live handle, `labels_out` must point to one writable
 * value per agent, and non-null out pointers must be writable.
 */
enum NetredStatus netred_pipeline_partition(const struct NetredSystem *sys,
                                            uint32_t method,
                                            uint32_t source,
                                            uint32_t algo,
                                            size_t order,
                                            size_t clusters,
                                            uint64_t seed,
                                            size_t *labels_out,
                                            double *h2_relative,
                                            double *hinf_relative);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NETRED_H */
