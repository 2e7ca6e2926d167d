#ifndef PEERMECH_H
#define PEERMECH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call. Anything other than `Ok` leaves a
 * human-readable message readable through `pm_last_error`.
 */
typedef enum PmStatus {
  PmStatus_Ok = 0,
  /**
   * Malformed input text (JSON or rational syntax).
   */
  PmStatus_Parse = 1,
  /**
   * Structurally well-formed input that violates a domain rule.
   */
  PmStatus_Invalid = 2,
  /**
   * A size guard refused the computation.
   */
  PmStatus_Guard = 3,
  PmStatus_Io = 4,
  /**
   * A required pointer argument was null.
   */
  PmStatus_NullInput = 5,
  /**
   * A string argument was not valid UTF-8.
   */
  PmStatus_InvalidUtf8 = 6,
  /**
   * An internal invariant failed; the library state is still sound.
   */
  PmStatus_Panicked = 7,
} PmStatus;

/**
 * A parsed instance plus its feasibility graph.
 */
typedef struct PmInstance PmInstance;

/**
 * A finished solve. Self-contained: rendering does not need the instance.
 */
typedef struct PmReport PmReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string. Never freed by the caller.
 */
const char *pm_version(void);

/**
 * Message of the most recent failure on this thread. Valid until the next
 * failing call on the same thread. Never freed by the caller.
 */
const char *pm_last_error(void);

/**
 * Parses an instance (an environment or a bare weight vector) from JSON and
 * builds its feasibility graph. On `Ok`, `*out` owns the handle; release it
 * with `pm_instance_free`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be a valid pointer.
 */
enum PmStatus pm_instance_parse(const char *json, struct PmInstance **out);

/**
 * # Safety
 * `p` must be null or a handle from `pm_instance_parse`, not yet freed.
 */
void pm_instance_free(struct PmInstance *p);

/**
 * Number of agents, or 0 if `p` is null.
 *
 * # Safety
 * `p` must be null or a live handle from `pm_instance_parse`.
 */
uint32_t pm_instance_agents(const struct PmInstance *p);

/**
 * Vertex count of the feasibility graph, or 0 if `p` is null.
 *
 * # Safety
 * `p` must be null or a live handle from `pm_instance_parse`.
 */
uint32_t pm_instance_vertex_count(const struct PmInstance *p);

/**
 * Exact optimal truthful mechanism. On `Ok`, `*out` owns the report;
 * release it with `pm_report_free`.
 *
 * # Safety
 * `p` must be a live handle from `pm_instance_parse`; `out` must be valid.
 */
enum PmStatus pm_solve_lp(const struct PmInstance *p, bool must_allocate, struct PmReport **out);

/**
 * Exact optimal deterministic mechanism (best stable set).
 *
 * # Safety
 * `p` must be a live handle from `pm_instance_parse`; `out` must be valid.
 */
enum PmStatus pm_solve_deterministic(const struct PmInstance *p,
                                     bool must_allocate,
                                     struct PmReport **out);

/**
 * Exact optimal jury mechanism. Requires a full environment; a bare weight
 * vector yields `Invalid`.
 *
 * # Safety
 * `p` must be a live handle from `pm_instance_parse`; `out` must be valid.
 */
enum PmStatus pm_solve_jury(const struct PmInstance *p, bool must_allocate, struct PmReport **out);

/**
 * # Safety
 * `r` must be null or a handle from a solve call, not yet freed.
 */
void pm_report_free(struct PmReport *r);

/**
 * Objective value as a `p/q` string. Free with `pm_string_free`.
 *
 * # Safety
 * `r` must be a live handle from a solve call; `out` must be valid.
 */
enum PmStatus pm_report_objective(const struct PmReport *r, char **out);

/**
 * Full report (status, objective, stats, mechanism) as JSON. Free with
 * `pm_string_free`.
 *
 * # Safety
 * `r` must be a live handle from a solve call; `out` must be valid.
 */
enum PmStatus pm_report_json(const struct PmReport *r, char **out);

/**
 * Decides whether a mechanism (as JSON) is an extreme point of the truthful
 * polytope of `p`, returning the certificate as JSON. Free the string with
 * `pm_string_free`.
 *
 * # Safety
 * `p` must be a live handle from `pm_instance_parse`; `mech_json` must be a
 * NUL-terminated string; `out` must be valid.
 */
enum PmStatus pm_extreme_certificate(const struct PmInstance *p, const char *mech_json, char **out);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must be null or a string pointer returned by this library, not yet
 * freed.
 */
void pm_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PEERMECH_H */
