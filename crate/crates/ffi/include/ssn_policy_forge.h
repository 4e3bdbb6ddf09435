#ifndef SSN_POLICY_FORGE_H
#define SSN_POLICY_FORGE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes shared by every entry point.
 */
typedef enum SpfStatus {
  SPF_STATUS_OK = 0,
  SPF_STATUS_NULL_POINTER = 1,
  SPF_STATUS_INVALID_UTF8 = 2,
  SPF_STATUS_INVALID_JSON = 3,
  SPF_STATUS_INVALID_POLICY = 4,
  SPF_STATUS_NOT_FOUND = 5,
  SPF_STATUS_INVALID_INPUT = 6,
  SPF_STATUS_PANIC = 7,
} SpfStatus;

/**
 * Opaque engine handle.
 */
typedef struct SpfEngine SpfEngine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *spf_version(void);

/**
 * Message for the last failed call on this thread, or null after a
 * success. Valid until the next call on the same thread.
 */
const char *spf_last_error_message(void);

/**
 * Release a string returned through an `out` parameter. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed already.
 */
void spf_string_free(char *s);

/**
 * Engine over the bundled mine, ontology and rules.
 *
 * # Safety
 * `out` must be a valid pointer to write the handle to.
 */
enum SpfStatus spf_engine_new(uint64_t seed, struct SpfEngine **out);

/**
 * Engine built from a scenario document. When `has_seed` is false the
 * scenario's own seed is used.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` a valid pointer.
 */
enum SpfStatus spf_engine_from_scenario(const char *json,
                                        uint64_t seed,
                                        bool has_seed,
                                        struct SpfEngine **out);

/**
 * Destroy an engine. Null is ignored.
 *
 * # Safety
 * `engine` must come from this library and not have been freed already.
 */
void spf_engine_free(struct SpfEngine *engine);

/**
 * Install or replace a policy given as JSON.
 *
 * # Safety
 * `engine` must be a live handle; `policy_json` a NUL-terminated string.
 */
enum SpfStatus spf_engine_upsert_policy(struct SpfEngine *engine, const char *policy_json);

/**
 * Uninstall a policy by id.
 *
 * # Safety
 * `engine` must be a live handle; `id` a NUL-terminated string.
 */
enum SpfStatus spf_engine_remove_policy(struct SpfEngine *engine, const char *id);

/**
 * Start a world event (gas leak or fire) at the current tick.
 *
 * # Safety
 * `engine` must be a live handle; `event_json` a NUL-terminated string.
 */
enum SpfStatus spf_engine_inject_event(struct SpfEngine *engine, const char *event_json);

/**
 * Advance `n` ticks. The new world tick is written to `tick_out` when it
 * is not null.
 *
 * # Safety
 * `engine` must be a live handle; `tick_out` null or valid.
 */
enum SpfStatus spf_engine_step(struct SpfEngine *engine, uint64_t n, uint64_t *tick_out);

/**
 * Rebuild the world. When `has_seed` is false the current seed is kept.
 *
 * # Safety
 * `engine` must be a live handle.
 */
enum SpfStatus spf_engine_reset(struct SpfEngine *engine, uint64_t seed, bool has_seed);

/**
 * Trigger log entries with `tick >= since` as a JSON array.
 *
 * # Safety
 * `engine` must be a live handle; `out` a valid pointer.
 */
enum SpfStatus spf_engine_log_json(struct SpfEngine *engine, uint64_t since, char **out);

/**
 * World snapshot (tick, tunnels, workers, events, fences) as JSON.
 *
 * # Safety
 * `engine` must be a live handle; `out` a valid pointer.
 */
enum SpfStatus spf_engine_state_json(struct SpfEngine *engine, char **out);

/**
 * ACAs matching a keyword query as a JSON array. An empty query lists all.
 *
 * # Safety
 * `engine` must be a live handle; `query` a NUL-terminated string; `out`
 * a valid pointer.
 */
enum SpfStatus spf_engine_search_acas(struct SpfEngine *engine, const char *query, char **out);

/**
 * SPARQL text of an installed policy.
 *
 * # Safety
 * `engine` must be a live handle; `id` a NUL-terminated string; `out` a
 * valid pointer.
 */
enum SpfStatus spf_engine_policy_query(struct SpfEngine *engine, const char *id, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SSN_POLICY_FORGE_H */
