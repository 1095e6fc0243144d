/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef REMOTE_SITE_H
#define REMOTE_SITE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RsStatus {
  RS_STATUS_OK = 0,
  RS_STATUS_NULL_POINTER = 1,
  RS_STATUS_INVALID_UTF8 = 2,
  RS_STATUS_INVALID_CONFIG = 3,
  RS_STATUS_INFEASIBLE = 4,
  RS_STATUS_INVARIANT_VIOLATION = 5,
  RS_STATUS_IO = 6,
  RS_STATUS_PANIC = 7,
} RsStatus;

/**
 * Run configuration.
 */
typedef struct RsConfig RsConfig;

/**
 * Completed simulation with its per-slot records.
 */
typedef struct RsReport RsReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Default configuration.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum RsStatus rs_config_default(struct RsConfig **out);

/**
 * Parses a JSON configuration; missing fields take their defaults.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum RsStatus rs_config_from_json(const char *json, struct RsConfig **out);

/**
 * Effective configuration as JSON.
 *
 * # Safety
 * `config` must come from this library; `out` must be a valid pointer.
 */
enum RsStatus rs_config_to_json(const struct RsConfig *config, char **out);

/**
 * Releases a configuration. Null is ignored.
 *
 * # Safety
 * `config` must come from this library and not be used afterwards.
 */
void rs_config_free(struct RsConfig *config);

/**
 * `RS_STATUS_OK` when the site can serve its input buffer within a slot,
 * `RS_STATUS_INFEASIBLE` otherwise.
 *
 * # Safety
 * `config` must come from this library.
 */
enum RsStatus rs_config_check_feasibility(const struct RsConfig *config);

/**
 * Runs the configured scenario to completion.
 *
 * # Safety
 * `config` must come from this library; `out` must be a valid pointer.
 */
enum RsStatus rs_simulation_run(const struct RsConfig *config, struct RsReport **out);

/**
 * Aggregate results as JSON.
 *
 * # Safety
 * `report` must come from this library; `out` must be a valid pointer.
 */
enum RsStatus rs_report_summary_json(const struct RsReport *report, char **out);

/**
 * Writes the per-slot CSV report to `path`.
 *
 * # Safety
 * `report` must come from this library; `path` must be NUL-terminated.
 */
enum RsStatus rs_report_write_csv(const struct RsReport *report, const char *path);

/**
 * Number of simulated slots; 0 for a null handle.
 *
 * # Safety
 * `report` must be null or come from this library.
 */
size_t rs_report_slot_count(const struct RsReport *report);

/**
 * Mean savings against the maximum-capacity site, in percent; NaN for a
 * null handle.
 *
 * # Safety
 * `report` must be null or come from this library.
 */
double rs_report_savings_percent(const struct RsReport *report);

/**
 * Releases a report. Null is ignored.
 *
 * # Safety
 * `report` must come from this library and not be used afterwards.
 */
void rs_report_free(struct RsReport *report);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void rs_string_free(char *s);

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call into the library on the same thread.
 */
const char *rs_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REMOTE_SITE_H */
