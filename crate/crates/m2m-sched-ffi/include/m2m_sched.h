#ifndef M2M_SCHED_H
#define M2M_SCHED_H

/* Generated by cbindgen from m2m-sched-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum MschedStatus {
  MSCHED_STATUS_OK = 0,
  MSCHED_STATUS_NULL_ARGUMENT = 1,
  MSCHED_STATUS_INVALID_UTF8 = 2,
  MSCHED_STATUS_INVALID_CONFIG = 3,
  MSCHED_STATUS_DOMAIN_ERROR = 4,
  MSCHED_STATUS_RUNTIME_ERROR = 5,
  MSCHED_STATUS_PANIC = 6,
} MschedStatus;

/**
 * Opaque experiment configuration.
 */
typedef struct MschedConfig MschedConfig;

/**
 * Opaque result of a finished experiment.
 */
typedef struct MschedReport MschedReport;

/**
 * Aggregate metrics of one experiment, averaged over replications.
 */
typedef struct MschedSummary {
  /**
   * Shortest individual lifetime, seconds.
   */
  double sil_s;
  /**
   * Longest individual lifetime, seconds.
   */
  double lil_s;
  /**
   * Average individual lifetime, seconds.
   */
  double ail_s;
  /**
   * Jain fairness index of the drain times.
   */
  double jain;
  /**
   * Delivered bits per consumed joule.
   */
  double energy_efficiency_bits_per_j;
  /**
   * Delivered bits per second-Hz of reserved resources.
   */
  double spectral_efficiency_bits_s_hz;
  /**
   * Nodes drained per replication (mean).
   */
  double drained_nodes;
  /**
   * Constraint violations across all replications (must be 0).
   */
  uint64_t violations;
  uint64_t replications;
} MschedSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Version of the underlying library, as a static NUL-terminated string.
 */
const char *msched_version(void);

/**
 * Human-readable name of a status code (static string).
 */
const char *msched_status_name(enum MschedStatus status);

/**
 * Principal-branch LambertW. Writes the result through `out`; fails with
 * `DomainError` below the branch point.
 *
 * # Safety
 * `out` must point to writable memory for one f64.
 */
enum MschedStatus msched_lambert_w(double x, double *out);

/**
 * Fresh configuration with the library defaults. Never returns NULL.
 */
struct MschedConfig *msched_config_default(void);

/**
 * Load a configuration from a TOML file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum MschedStatus msched_config_load(const char *path, struct MschedConfig **out);

/**
 * Apply a `section.key=value` override (same syntax as the CLI `--set`).
 *
 * # Safety
 * `cfg` must be a live handle from this library; `spec` NUL-terminated.
 */
enum MschedStatus msched_config_set(struct MschedConfig *cfg, const char *spec);

/**
 * Release a configuration handle. NULL is a no-op.
 *
 * # Safety
 * `cfg` must have come from this library and not been freed before.
 */
void msched_config_free(struct MschedConfig *cfg);

/**
 * Run the configured experiment (all replications, in parallel) and hand
 * back a report handle.
 *
 * # Safety
 * `cfg` must be a live handle; `out` must be writable.
 */
enum MschedStatus msched_run(const struct MschedConfig *cfg, struct MschedReport **out);

/**
 * Aggregate metrics of a finished experiment.
 *
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
enum MschedStatus msched_report_summary(const struct MschedReport *report,
                                        struct MschedSummary *out);

/**
 * Release a report handle. NULL is a no-op.
 *
 * # Safety
 * `report` must have come from this library and not been freed before.
 */
void msched_report_free(struct MschedReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* M2M_SCHED_H */
