#ifndef CHANCOH_H
#define CHANCOH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ChcExample {
  CHC_EXAMPLE_PHI1 = 0,
  CHC_EXAMPLE_PHI2 = 1,
  CHC_EXAMPLE_PHI_MIX = 2,
  // Trace-preserving incoherent reference channel.
  CHC_EXAMPLE_PHI0 = 3,
} ChcExample;

typedef enum ChcMeasure {
  CHC_MEASURE_L1 = 0,
  CHC_MEASURE_RELATIVE_ENTROPY = 1,
  CHC_MEASURE_TRACE_DISTANCE = 2,
  CHC_MEASURE_MODIFIED_TRACE_DISTANCE = 3,
} ChcMeasure;

typedef enum ChcStatus {
  CHC_STATUS_OK = 0,
  CHC_STATUS_NULL_POINTER = 1,
  CHC_STATUS_INVALID_ARGUMENT = 2,
  // The object is not a channel / superchannel, or dimensions disagree.
  CHC_STATUS_INVALID_OBJECT = 3,
  CHC_STATUS_PARSE = 4,
  // The solver hit its iteration cap; outputs hold the best value found.
  CHC_STATUS_NOT_CONVERGED = 5,
  CHC_STATUS_UNSUPPORTED = 6,
  // A Rust panic was caught at the boundary.
  CHC_STATUS_INTERNAL = 7,
} ChcStatus;

// Opaque channel handle.
typedef struct ChcChannel ChcChannel;

// Opaque superchannel handle.
typedef struct ChcSuperchannel ChcSuperchannel;

typedef struct ChcSolverOptions {
  size_t max_iterations;
  double step_scale;
  double tolerance;
  size_t stall_window;
  size_t restarts;
  uint64_t seed;
} ChcSolverOptions;

typedef struct ChcMeasureResult {
  double value;
  // `-INFINITY` when no certificate is available.
  double lower_bound;
  // NaN unless the modified trace measure was evaluated.
  double lambda;
  size_t iterations;
  bool converged;
} ChcMeasureResult;

typedef struct ChcCounterexample {
  double ctr_phi1;
  double ctr_phi2;
  double additive_rhs;
  double ctr_mix_upper;
  double ctr_mix_solved;
  double gap;
  bool violated;
  bool converged;
} ChcCounterexample;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *chc_last_error_message(void);

struct ChcSolverOptions chc_solver_options_default(void);

// Builds a channel from `count` Kraus operators of shape `dim_out x dim_in`
// stored back to back in `kraus` (`2 * count * dim_out * dim_in` doubles).
//
// # Safety
// `kraus` must point to that many doubles and `out` must be writable.
enum ChcStatus chc_channel_from_kraus(size_t dim_in,
                                      size_t dim_out,
                                      size_t count,
                                      const double *kraus,
                                      struct ChcChannel **out);

// Parses a channel JSON document (Kraus or Choi form).
//
// # Safety
// `json` must be a NUL-terminated string and `out` writable.
enum ChcStatus chc_channel_from_json(const char *json, struct ChcChannel **out);

// Serializes a channel to JSON. Release the string with [`chc_string_free`].
//
// # Safety
// `channel` must be a live handle and `out` writable.
enum ChcStatus chc_channel_to_json(const struct ChcChannel *channel, char **out);

// # Safety
// `s` must come from this library or be null.
void chc_string_free(char *s);

// # Safety
// `channel` must be a live handle or null; it is invalid afterwards.
void chc_channel_free(struct ChcChannel *channel);

// # Safety
// `channel` must be a live handle; the output pointers writable or null.
enum ChcStatus chc_channel_dims(const struct ChcChannel *channel, size_t *dim_in, size_t *dim_out);

// Copies the Choi matrix into `buffer`, which must hold
// `2 * (dim_in * dim_out)^2` doubles (`len` is checked).
//
// # Safety
// `channel` must be a live handle and `buffer` writable for `len` doubles.
enum ChcStatus chc_channel_choi(const struct ChcChannel *channel, double *buffer, size_t len);

// # Safety
// `out` must be writable.
enum ChcStatus chc_example_channel(enum ChcExample which, struct ChcChannel **out);

// Random channel (`incoherent = false`, `kraus_count` operators) or random
// incoherent channel; deterministic in `seed`.
//
// # Safety
// `out` must be writable.
enum ChcStatus chc_random_channel(size_t dim_in,
                                  size_t dim_out,
                                  size_t kraus_count,
                                  bool incoherent,
                                  uint64_t seed,
                                  struct ChcChannel **out);

// Evaluates `measure`; `options` may be null for the defaults. Returns
// `NotConverged` (with `out` filled) when the solver hit its cap.
//
// # Safety
// `channel` must be a live handle, `options` null or valid, `out` writable.
enum ChcStatus chc_measure(const struct ChcChannel *channel,
                           enum ChcMeasure measure,
                           const struct ChcSolverOptions *options,
                           struct ChcMeasureResult *out);

// # Safety
// `json` must be a NUL-terminated string and `out` writable.
enum ChcStatus chc_superchannel_from_json(const char *json, struct ChcSuperchannel **out);

// # Safety
// `theta` must be a live handle or null; it is invalid afterwards.
void chc_superchannel_free(struct ChcSuperchannel *theta);

// Applies `theta` to `channel`; fails with `InvalidObject` if the result is
// not a channel.
//
// # Safety
// Both handles must be live and `out` writable.
enum ChcStatus chc_superchannel_apply(const struct ChcSuperchannel *theta,
                                      const struct ChcChannel *channel,
                                      struct ChcChannel **out);

// # Safety
// `options` null or valid, `out` writable.
enum ChcStatus chc_counterexample(const struct ChcSolverOptions *options,
                                  struct ChcCounterexample *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHANCOH_H */
