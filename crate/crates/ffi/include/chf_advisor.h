#ifndef CHF_ADVISOR_H
#define CHF_ADVISOR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. `CHF_STATUS_OK` is zero; everything else is an error.
 */
typedef enum ChfStatus {
  CHF_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  CHF_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  CHF_STATUS_INVALID_UTF8 = 2,
  /**
   * A file could not be read.
   */
  CHF_STATUS_IO = 3,
  /**
   * Program or query text did not parse.
   */
  CHF_STATUS_PARSE = 4,
  /**
   * Unsafe rules or ill-typed comparisons.
   */
  CHF_STATUS_GROUND = 5,
  /**
   * Malformed or invalid patient JSON, unknown treatment or class, or an
   * unsafe query.
   */
  CHF_STATUS_INVALID_INPUT = 6,
  /**
   * The step budget ran out before the search finished.
   */
  CHF_STATUS_RESOURCE_LIMIT = 7,
  /**
   * A bug inside the library; the message says where.
   */
  CHF_STATUS_INTERNAL = 8,
} ChfStatus;

/**
 * A loaded knowledge base.
 */
typedef struct ChfKb ChfKb;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Loads the knowledge base bundled with the library into `*out`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for a handle.
 */
enum ChfStatus chf_kb_load_default(struct ChfKb **out);

/**
 * Loads `.lp` files (directories contribute their `.lp` files in name
 * order) into `*out`. With `count == 0` the base is empty.
 *
 * # Safety
 * `paths` must point to `count` NUL-terminated strings; `out` must be
 * writable.
 */
enum ChfStatus chf_kb_load_paths(const char *const *paths, size_t count, struct ChfKb **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `kb` must come from one of the load functions and not be used again.
 */
void chf_kb_free(struct ChfKb *kb);

/**
 * Number of rules in the loaded base (patterns expanded).
 *
 * # Safety
 * `kb` must be a live handle and `out` writable.
 */
enum ChfStatus chf_kb_rule_count(const struct ChfKb *kb, size_t *out);

/**
 * Recommendations for a patient document, as a JSON array of
 * `{treatment, class, support: {positive, nafs}}`. `limit == 0` means all.
 *
 * # Safety
 * `kb` must be a live handle, `patient_json` a NUL-terminated string and
 * `out_json` writable. The result must be released with `chf_string_free`.
 */
enum ChfStatus chf_recommend_json(const struct ChfKb *kb,
                                  const char *patient_json,
                                  size_t limit,
                                  char **out_json);

/**
 * What would have to hold for `treatment` to be recommended at
 * `class_label`, as a JSON array of `{assumptions: {positive, negative},
 * support: {positive, nafs}}`. `limit == 0` means all.
 *
 * # Safety
 * As for [`chf_recommend_json`]; `treatment` and `class_label` must be
 * NUL-terminated strings.
 */
enum ChfStatus chf_whatif_json(const struct ChfKb *kb,
                               const char *patient_json,
                               const char *treatment,
                               const char *class_label,
                               size_t limit,
                               char **out_json);

/**
 * Answers `query` against the base plus `program` (extra facts and rules
 * in `.lp` syntax; may be null). The result is a JSON array of
 * `{bindings, positive, nafs, assumptions}` with literals in `.lp` syntax.
 * `limit == 0` means all.
 *
 * # Safety
 * `kb` must be a live handle, `query` a NUL-terminated string, `program`
 * null or NUL-terminated, and `out_json` writable.
 */
enum ChfStatus chf_solve_json(const struct ChfKb *kb,
                              const char *program,
                              const char *query,
                              size_t limit,
                              char **out_json);

/**
 * The message for the last failed call on this thread; empty after a
 * successful call. Valid until the next call on this thread; do not free.
 */
const char *chf_last_error_message(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used again.
 */
void chf_string_free(char *s);

/**
 * The library version; static, do not free.
 */
const char *chf_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHF_ADVISOR_H */
