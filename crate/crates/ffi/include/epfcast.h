#ifndef EPFCAST_H
#define EPFCAST_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum EpfStatus {
  EPF_STATUS_OK = 0,
  EPF_STATUS_NULL_POINTER = 1,
  EPF_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Malformed input data.
   */
  EPF_STATUS_DATA_ERROR = 3,
  /**
   * A numerical routine failed (degenerate window, no convergence, ...).
   */
  EPF_STATUS_NUMERIC_ERROR = 4,
  EPF_STATUS_IO_ERROR = 5,
  /**
   * A Rust panic was caught at the boundary.
   */
  EPF_STATUS_PANIC = 6,
} EpfStatus;

typedef enum EpfSmoother {
  /**
   * Centered moving average; level in days (1, 7, 28, 56, 91).
   */
  EPF_SMOOTHER_MOVING_AVERAGE = 0,
  /**
   * Wavelet approximation; level J (5, 7, 9, 10, 11).
   */
  EPF_SMOOTHER_WAVELET = 1,
} EpfSmoother;

/**
 * Run configuration with all defaults; change it with [`epf_config_set`].
 */
typedef struct EpfConfig EpfConfig;

/**
 * Forecasts of every variant over the test days.
 */
typedef struct EpfForecasts EpfForecasts;

/**
 * Hourly prices and exogenous forecasts.
 */
typedef struct EpfPanel EpfPanel;

/**
 * Median and MAD of a calibration window.
 */
typedef struct EpfNormalizer {
  double median;
  double mad;
} EpfNormalizer;

/**
 * Fitted linear model in original units.
 */
typedef struct EpfLassoFit {
  double intercept;
  double lambda;
  size_t nonzero;
} EpfLassoFit;

typedef struct EpfDmResult {
  double statistic;
  /**
   * Small values mean the second model is more accurate.
   */
  double p_value;
  size_t days;
} EpfDmResult;

typedef struct EpfBattery {
  double capacity;
  double min_level;
  double efficiency;
  double trade_volume;
  bool charge_first;
} EpfBattery;

/**
 * One day's trade; hours are 0-based.
 */
typedef struct EpfTrade {
  size_t buy_hour;
  size_t sell_hour;
  double profit;
  bool traded;
} EpfTrade;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * Valid until the next call into this library on the same thread.
 */
const char *epf_last_error(void);

/**
 * Library version, a static string.
 */
const char *epf_version(void);

/**
 * Hours per day in every day-major buffer.
 */
size_t epf_hours_per_day(void);

/**
 * Reads and validates a market CSV, repairing daylight-saving hours.
 *
 * # Safety
 * `path` must be a nul-terminated string and `out` a valid pointer.
 */
enum EpfStatus epf_panel_from_csv(const char *path, struct EpfPanel **out);

/**
 * Builds a panel from day-major arrays of `days * 24` values each.
 *
 * # Safety
 * Each array must hold `days * 24` values; `out` must be valid.
 */
enum EpfStatus epf_panel_from_arrays(int32_t year,
                                     uint32_t month,
                                     uint32_t day,
                                     size_t days,
                                     const double *price,
                                     const double *load_da,
                                     const double *res_da,
                                     struct EpfPanel **out);

/**
 * Number of days in the panel; 0 for a null handle.
 *
 * # Safety
 * `panel` must be null or a live handle.
 */
size_t epf_panel_days(const struct EpfPanel *panel);

/**
 * # Safety
 * `panel` must be null or a handle not yet freed.
 */
void epf_panel_free(struct EpfPanel *panel);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum EpfStatus epf_config_new(struct EpfConfig **out);

/**
 * Sets one configuration key, as in the CLI config file.
 *
 * # Safety
 * `config` must be live; `key` and `value` nul-terminated strings.
 */
enum EpfStatus epf_config_set(struct EpfConfig *config, const char *key, const char *value);

/**
 * # Safety
 * `config` must be null or a handle not yet freed.
 */
void epf_config_free(struct EpfConfig *config);

/**
 * Backtests days `test_start..=test_end` (0-based panel days). Failed
 * cells are NaN and counted by [`epf_forecasts_failure_count`].
 *
 * # Safety
 * `panel` and `config` must be live handles; `out` a valid pointer.
 */
enum EpfStatus epf_backtest_run(const struct EpfPanel *panel,
                                const struct EpfConfig *config,
                                size_t test_start,
                                size_t test_end,
                                struct EpfForecasts **out);

/**
 * # Safety
 * `f` must be null or a live handle.
 */
size_t epf_forecasts_variant_count(const struct EpfForecasts *f);

/**
 * # Safety
 * `f` must be null or a live handle.
 */
size_t epf_forecasts_day_count(const struct EpfForecasts *f);

/**
 * # Safety
 * `f` must be null or a live handle.
 */
size_t epf_forecasts_failure_count(const struct EpfForecasts *f);

/**
 * Name such as `eSCLEAR-MAS`, owned by the handle; null when out of range.
 *
 * # Safety
 * `f` must be null or a live handle.
 */
const char *epf_forecasts_variant_name(const struct EpfForecasts *f, size_t variant);

/**
 * Panel day index of test day `day`.
 *
 * # Safety
 * `f` must be a live handle and `out` valid.
 */
enum EpfStatus epf_forecasts_day(const struct EpfForecasts *f, size_t day, size_t *out);

/**
 * Copies the 24 hourly forecasts of one variant and test day into `out`.
 *
 * # Safety
 * `f` must be a live handle; `out` must hold 24 values.
 */
enum EpfStatus epf_forecasts_get(const struct EpfForecasts *f,
                                 size_t variant,
                                 size_t day,
                                 double *out);

/**
 * # Safety
 * `f` must be null or a handle not yet freed.
 */
void epf_forecasts_free(struct EpfForecasts *f);

/**
 * # Safety
 * `values` must hold `len` values; `out` must be valid.
 */
enum EpfStatus epf_vst_fit(const double *values, size_t len, struct EpfNormalizer *out);

/**
 * `asinh` transform of `len` values; `input` and `output` may alias.
 *
 * # Safety
 * Both buffers must hold `len` values.
 */
enum EpfStatus epf_vst_transform(struct EpfNormalizer norm,
                                 const double *input,
                                 size_t len,
                                 double *output);

/**
 * Inverse of [`epf_vst_transform`].
 *
 * # Safety
 * Both buffers must hold `len` values.
 */
enum EpfStatus epf_vst_inverse(struct EpfNormalizer norm,
                               const double *input,
                               size_t len,
                               double *output);

/**
 * Long-term seasonal component of `len` hourly values.
 *
 * # Safety
 * `input` and `output` must hold `len` values.
 */
enum EpfStatus epf_ltsc_smooth(enum EpfSmoother smoother,
                               uint32_t level,
                               const double *input,
                               size_t len,
                               double *output);

/**
 * LASSO at a fixed `lambda` on a row-major `nrows x ncols` matrix. The
 * regressors are standardized internally; `coefficients` receives `ncols`
 * values in original units.
 *
 * # Safety
 * `x` holds `nrows * ncols` values, `y` holds `nrows`, `coefficients`
 * holds `ncols`; `out` must be valid.
 */
enum EpfStatus epf_lasso_fit(const double *x,
                             size_t nrows,
                             size_t ncols,
                             const double *y,
                             double lambda,
                             double *coefficients,
                             struct EpfLassoFit *out);

/**
 * LASSO with lambda chosen by AIC along the default grid.
 *
 * # Safety
 * As for [`epf_lasso_fit`].
 */
enum EpfStatus epf_lasso_select(const double *x,
                                size_t nrows,
                                size_t ncols,
                                const double *y,
                                double *coefficients,
                                struct EpfLassoFit *out);

/**
 * Diebold-Mariano test on day-major forecast errors (`days * 24` each).
 *
 * # Safety
 * Both buffers must hold `days * 24` values; `out` must be valid.
 */
enum EpfStatus epf_dm_test(const double *errors_a,
                           const double *errors_b,
                           size_t days,
                           struct EpfDmResult *out);

struct EpfBattery epf_battery_default(void);

/**
 * Trades on `forecast` (24 values) and settles at `prices` (24 values).
 *
 * # Safety
 * Both buffers must hold 24 values; `out` must be valid.
 */
enum EpfStatus epf_trade_day(struct EpfBattery battery,
                             const double *prices,
                             const double *forecast,
                             struct EpfTrade *out);

/**
 * Best trade with perfect knowledge of `prices` (24 values).
 *
 * # Safety
 * `prices` must hold 24 values; `out` must be valid.
 */
enum EpfStatus epf_crystal_ball_day(struct EpfBattery battery,
                                    const double *prices,
                                    struct EpfTrade *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EPFCAST_H */
