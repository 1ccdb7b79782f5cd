#ifndef TPB_H
#define TPB_H

#pragma once

/* This file is generated by cbindgen from tpb-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum TpbStatus {
  TpbStatus_Ok = 0,
  TpbStatus_NullPointer = 1,
  TpbStatus_InvalidUtf8 = 2,
  TpbStatus_ConfigError = 3,
  TpbStatus_RunError = 4,
  TpbStatus_IoError = 5,
} TpbStatus;

/**
 * Opaque parsed experiment configuration.
 */
typedef struct TpbConfig TpbConfig;

/**
 * Opaque experiment report (curves, bounds, provenance).
 */
typedef struct TpbReport TpbReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null. The pointer
 * stays valid until the next library call on the same thread.
 */
const char *tpb_last_error(void);

/**
 * Library version as a static NUL-terminated string; do not free.
 */
const char *tpb_version(void);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `s` must be null or a pointer previously returned by a `tpb_*` function
 * documented as caller-owned, and must not be used afterwards.
 */
void tpb_string_free(char *s);

/**
 * Parse config text (the same `key = value` format the CLI reads) into an
 * opaque handle written to `*out`.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum TpbStatus tpb_config_parse(const char *text, struct TpbConfig **out);

/**
 * Release a config handle.
 *
 * # Safety
 * `config` must be null or a pointer from `tpb_config_parse`, freed once.
 */
void tpb_config_free(struct TpbConfig *config);

/**
 * Override the trial count (same effect as the CLI `--trials` flag).
 *
 * # Safety
 * `config` must be a valid handle from `tpb_config_parse`.
 */
enum TpbStatus tpb_config_set_trials(struct TpbConfig *config, uint64_t trials);

/**
 * Override the base seed (same effect as the CLI `--seed` flag).
 *
 * # Safety
 * `config` must be a valid handle from `tpb_config_parse`.
 */
enum TpbStatus tpb_config_set_seed(struct TpbConfig *config, uint64_t seed);

/**
 * Hash of the canonical config text; caller frees with `tpb_string_free`.
 * Returns null on a null handle.
 *
 * # Safety
 * `config` must be null or a valid handle from `tpb_config_parse`.
 */
char *tpb_config_hash(const struct TpbConfig *config);

/**
 * Run the experiment over `jobs` worker threads (0 means 1); writes an
 * opaque report handle to `*out`. Results do not depend on `jobs`.
 *
 * # Safety
 * `config` must be a valid handle and `out` a valid pointer.
 */
enum TpbStatus tpb_run(const struct TpbConfig *config, uint32_t jobs, struct TpbReport **out);

/**
 * Release a report handle.
 *
 * # Safety
 * `report` must be null or a pointer from `tpb_run`, freed once.
 */
void tpb_report_free(struct TpbReport *report);

/**
 * The full report as CSV text; caller frees with `tpb_string_free`.
 *
 * # Safety
 * `report` must be null or a valid handle from `tpb_run`.
 */
char *tpb_report_csv(const struct TpbReport *report);

/**
 * Write the report CSV to `path`.
 *
 * # Safety
 * `report` must be a valid handle and `path` a NUL-terminated string.
 */
enum TpbStatus tpb_report_write_csv(const struct TpbReport *report, const char *path);

/**
 * 1 when a two-phase mean exceeded its theoretical bound, 0 otherwise,
 * -1 on a null handle.
 *
 * # Safety
 * `report` must be null or a valid handle from `tpb_run`.
 */
int32_t tpb_report_bound_violation(const struct TpbReport *report);

/**
 * Number of policy curves in the report (0 on null).
 *
 * # Safety
 * `report` must be null or a valid handle from `tpb_run`.
 */
size_t tpb_report_policy_count(const struct TpbReport *report);

/**
 * Number of checkpoints (0 on null).
 *
 * # Safety
 * `report` must be null or a valid handle from `tpb_run`.
 */
size_t tpb_report_checkpoint_count(const struct TpbReport *report);

/**
 * Checkpoint timestep by index (0 when out of range).
 *
 * # Safety
 * `report` must be null or a valid handle from `tpb_run`.
 */
uint64_t tpb_report_checkpoint(const struct TpbReport *report, size_t index);

/**
 * Policy name by curve index; caller frees with `tpb_string_free`.
 *
 * # Safety
 * `report` must be null or a valid handle from `tpb_run`.
 */
char *tpb_report_policy_name(const struct TpbReport *report, size_t policy);

/**
 * Mean cumulative pseudo-regret at (policy, checkpoint); NaN out of range.
 *
 * # Safety
 * `report` must be null or a valid handle from `tpb_run`.
 */
double tpb_report_mean(const struct TpbReport *report, size_t policy, size_t checkpoint);

/**
 * Standard error at (policy, checkpoint); NaN out of range.
 *
 * # Safety
 * `report` must be null or a valid handle from `tpb_run`.
 */
double tpb_report_stderr(const struct TpbReport *report, size_t policy, size_t checkpoint);

/**
 * Theoretical bound at (policy, checkpoint); NaN when no bound applies.
 *
 * # Safety
 * `report` must be null or a valid handle from `tpb_run`.
 */
double tpb_report_bound(const struct TpbReport *report, size_t policy, size_t checkpoint);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TPB_H */
