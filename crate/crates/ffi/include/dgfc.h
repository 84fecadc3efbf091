#ifndef DGFC_H
#define DGFC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DgfcStatus {
  DGFC_STATUS_OK = 0,
  DGFC_STATUS_NULL_POINTER = 1,
  DGFC_STATUS_VALIDATION = 2,
  DGFC_STATUS_NUMERIC = 3,
  DGFC_STATUS_IO = 4,
  DGFC_STATUS_PANIC = 5,
} DgfcStatus;

// Stored posterior draws.
typedef struct DgfcDraws DgfcDraws;

// Predictive sample, M draws × H horizons × n variables.
typedef struct DgfcForecast DgfcForecast;

// Observed panel.
typedef struct DgfcPanel DgfcPanel;

// Sampler settings for [`dgfc_fit`].
typedef struct DgfcFitOptions {
  size_t total;
  size_t burn;
  size_t thin;
  uint64_t seed;
  // Factor count; 0 picks the default.
  size_t k;
  // 0 factor model, 1 VAR copula.
  uint32_t model;
} DgfcFitOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// Valid until the next call into the library on this thread.
const char *dgfc_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *dgfc_version(void);

// Builds a panel from `t_len * n` row-major values. `kinds` holds one
// entry per variable (0 continuous, 1 count) or may be null for all
// continuous.
//
// # Safety
// `values` must point to `t_len * n` doubles and `kinds`, if not null, to
// `n` bytes. `out` must be writable.
enum DgfcStatus dgfc_panel_new(const double *values,
                               size_t t_len,
                               size_t n,
                               const uint8_t *kinds,
                               struct DgfcPanel **out);

// # Safety
// `panel` must come from [`dgfc_panel_new`] and not be used afterwards.
void dgfc_panel_free(struct DgfcPanel *panel);

// Default options: 10000 iterations, 5000 burn-in, thin 5, seed 0.
struct DgfcFitOptions dgfc_fit_options_default(void);

// Runs the Gibbs sampler on a panel.
//
// # Safety
// `panel` must be a live handle and `opts`, `out` valid pointers.
enum DgfcStatus dgfc_fit(const struct DgfcPanel *panel,
                         const struct DgfcFitOptions *opts,
                         struct DgfcDraws **out);

// Number of stored draws; 0 for a null handle.
//
// # Safety
// `draws` must be null or a live handle.
size_t dgfc_draws_len(const struct DgfcDraws *draws);

// # Safety
// `draws` must come from [`dgfc_fit`] and not be used afterwards.
void dgfc_draws_free(struct DgfcDraws *draws);

// One predictive path per stored draw for horizons 1..=`horizons`.
//
// # Safety
// `draws` must be a live handle and `out` writable.
enum DgfcStatus dgfc_forecast(const struct DgfcDraws *draws,
                              size_t horizons,
                              uint64_t seed,
                              struct DgfcForecast **out);

// Writes the sample dimensions (draws, horizons, variables).
//
// # Safety
// `forecast` must be a live handle; output pointers must be writable.
enum DgfcStatus dgfc_forecast_dims(const struct DgfcForecast *forecast,
                                   size_t *m,
                                   size_t *h,
                                   size_t *n);

// Copies the sample into `buf`, laid out [draw][horizon][variable].
//
// # Safety
// `buf` must hold `len` doubles.
enum DgfcStatus dgfc_forecast_values(const struct DgfcForecast *forecast, double *buf, size_t len);

// # Safety
// `forecast` must come from [`dgfc_forecast`] and not be used afterwards.
void dgfc_forecast_free(struct DgfcForecast *forecast);

// Sample CRPS of `len` draws against `obs`.
//
// # Safety
// `draws` must hold `len` doubles and `out` be writable.
enum DgfcStatus dgfc_crps_sample(const double *draws, size_t len, double obs, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DGFC_H */
