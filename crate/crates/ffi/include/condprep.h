#ifndef CONDPREP_H
#define CONDPREP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum CondprepStatus {
  CONDPREP_STATUS_OK = 0,
  CONDPREP_STATUS_NULL_POINTER = 1,
  CONDPREP_STATUS_INVALID_ARGUMENT = 2,
  CONDPREP_STATUS_OUT_OF_DOMAIN = 3,
  CONDPREP_STATUS_DIMENSION = 4,
  CONDPREP_STATUS_ZERO_PROBABILITY = 5,
  CONDPREP_STATUS_UNSUPPORTED = 6,
  CONDPREP_STATUS_IO = 7,
  CONDPREP_STATUS_PARSE = 8,
  CONDPREP_STATUS_BUFFER_TOO_SMALL = 9,
  CONDPREP_STATUS_INTERNAL = 10,
} CondprepStatus;

/**
 * Detection of the sender's y mode.
 */
typedef enum CondprepAyDetection {
  CONDPREP_AY_DETECTION_NO_CLICK = 0,
  CONDPREP_AY_DETECTION_UNDETECTED = 1,
} CondprepAyDetection;

/**
 * Vacuum weight used in the closed-form fidelity.
 */
typedef enum CondprepVacuumModel {
  CONDPREP_VACUUM_MODEL_DERIVED = 0,
  CONDPREP_VACUUM_MODEL_PUBLISHED = 1,
} CondprepVacuumModel;

/**
 * Opaque cascade of N single-photon-sensitive detectors.
 */
typedef struct CondprepCascade CondprepCascade;

/**
 * Opaque result of a command-line subcommand.
 */
typedef struct CondprepReport CondprepReport;

/**
 * Opaque teleportation-experiment configuration.
 */
typedef struct CondprepTeleport CondprepTeleport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer stays
 * valid until the next call into this library from the same thread.
 */
const char *condprep_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *condprep_version(void);

/**
 * # Safety
 * `out` must be null or valid for writes.
 */
enum CondprepStatus condprep_cascade_new(size_t n, double eta2, struct CondprepCascade **out);

/**
 * Probability that exactly `k` detectors fire for `m` incoming photons.
 *
 * # Safety
 * `h` must be null or a live cascade handle; `out` null or writable.
 */
enum CondprepStatus condprep_cascade_probability(const struct CondprepCascade *h,
                                                 uint32_t k,
                                                 uint32_t m,
                                                 double *out);

/**
 * # Safety
 * `h` must be null or a handle from `condprep_cascade_new` not yet freed.
 */
void condprep_cascade_free(struct CondprepCascade *h);

/**
 * Both sources at pair probability `p`, all detectors at `eta2`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum CondprepStatus condprep_teleport_new(double p,
                                          double theta,
                                          size_t n,
                                          double eta2,
                                          struct CondprepTeleport **out);

/**
 * Selects detection of the y mode and the vacuum model, given as
 * `CondprepAyDetection` and `CondprepVacuumModel` values. Integers are taken
 * so that out-of-range codes are rejected instead of being undefined.
 *
 * # Safety
 * `h` must be null or a live teleport handle.
 */
enum CondprepStatus condprep_teleport_set_detection(struct CondprepTeleport *h,
                                                    int32_t ay,
                                                    int32_t model);

/**
 * Closed-form second-order fidelity.
 *
 * # Safety
 * `h` must be null or a live teleport handle; `out` null or writable.
 */
enum CondprepStatus condprep_teleport_fidelity(const struct CondprepTeleport *h, double *out);

/**
 * Fidelity from the full Fock-space simulation (slow for large N).
 *
 * # Safety
 * `h` must be null or a live teleport handle; `out` null or writable.
 */
enum CondprepStatus condprep_teleport_simulate(const struct CondprepTeleport *h, double *out);

/**
 * # Safety
 * `h` must be null or a handle from `condprep_teleport_new` not yet freed.
 */
void condprep_teleport_free(struct CondprepTeleport *h);

/**
 * Single-photon confidence of an N-detector cascade; `n = 0` selects N → ∞.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum CondprepStatus condprep_confidence(size_t n, double eta2, double delta, double *out);

/**
 * Deposition rate of the N-photon state with m photons in one beam.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum CondprepStatus condprep_deposition(uint32_t n,
                                        uint32_t m,
                                        double theta,
                                        double phi,
                                        double *out);

/**
 * Runs a subcommand given `argc` NUL-terminated arguments (without the
 * program name), e.g. `{"nport-table", "--n-max", "3"}`.
 *
 * # Safety
 * `argv` must point to `argc` valid C strings; `out` null or writable.
 */
enum CondprepStatus condprep_report_run(size_t argc,
                                        const char *const *argv,
                                        struct CondprepReport **out);

/**
 * Whether every check in the report passed (1) or not (0).
 *
 * # Safety
 * `h` must be null or a live report handle; `out` null or writable.
 */
enum CondprepStatus condprep_report_passed(const struct CondprepReport *h, int32_t *out);

/**
 * JSON text of the report, owned by the handle.
 *
 * # Safety
 * `h` must be null or a live report handle.
 */
const char *condprep_report_json(const struct CondprepReport *h);

/**
 * Copies the report in CSV form into `buf` (NUL-terminated). `needed`
 * receives the size including the terminator; BufferTooSmall is returned
 * when `len` is insufficient, so callers may query with a null buffer.
 *
 * # Safety
 * `h` must be a live report handle, `buf` null or valid for `len` bytes,
 * `needed` null or writable.
 */
enum CondprepStatus condprep_report_csv(const struct CondprepReport *h,
                                        char *buf,
                                        size_t len,
                                        size_t *needed);

/**
 * # Safety
 * `h` must be null or a handle from `condprep_report_run` not yet freed.
 */
void condprep_report_free(struct CondprepReport *h);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONDPREP_H */
