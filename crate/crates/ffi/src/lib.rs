//! C ABI over `epfcast`.
//!
//! Every fallible function returns an [`EpfStatus`]; on failure the message
//! is available from [`epf_last_error`] on the same thread. Handles are
//! opaque and released with their `_free` function. Buffers passed in are
//! borrowed for the duration of the call only.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use epfcast::config::RunConfig;
use epfcast::ltsc::LtscSpec;
use epfcast::pipeline::{self, ForecastMatrix};
use epfcast::regress::{FittedModel, LassoOptions, LassoProblem, Matrix};
use epfcast::timeseries::{self, DayRow, HourlyPanel, HOURS};
use epfcast::trading::{self, BatterySpec};
use epfcast::vst::Normalizer;
use epfcast::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Malformed input data.
    DataError = 3,
    /// A numerical routine failed (degenerate window, no convergence, ...).
    NumericError = 4,
    IoError = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(EpfStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io(_) => EpfStatus::IoError,
            Error::Config(_) | Error::InvalidLevel { .. } | Error::Empty(_) => EpfStatus::InvalidArgument,
            e if e.is_data_error() => EpfStatus::DataError,
            _ => EpfStatus::NumericError,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(EpfStatus::InvalidArgument, msg.into())
}

/// Runs `f`, mapping errors and panics to a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> EpfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            EpfStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("panic: {msg}"));
            EpfStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(EpfStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

unsafe fn slice<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    non_null(p, name)?;
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, name: &str) -> Result<&'a mut [f64], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    non_null(p, name)?;
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn string<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    non_null(p, name)?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{name} is not UTF-8")))
}

unsafe fn day_rows(p: *const f64, days: usize, name: &str) -> Result<Vec<DayRow>, Failure> {
    let flat = slice(p, days.checked_mul(HOURS).ok_or_else(|| invalid("size overflow"))?, name)?;
    Ok(flat
        .chunks_exact(HOURS)
        .map(|c| {
            let mut r = [0.0; HOURS];
            r.copy_from_slice(c);
            r
        })
        .collect())
}

unsafe fn day_row(p: *const f64, name: &str) -> Result<DayRow, Failure> {
    Ok(day_rows(p, 1, name)?[0])
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn epf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn epf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Hours per day in every day-major buffer.
#[no_mangle]
pub extern "C" fn epf_hours_per_day() -> usize {
    HOURS
}

/// Hourly prices and exogenous forecasts.
pub struct EpfPanel {
    inner: HourlyPanel,
}

/// Reads and validates a market CSV, repairing daylight-saving hours.
///
/// # Safety
/// `path` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn epf_panel_from_csv(path: *const c_char, out: *mut *mut EpfPanel) -> EpfStatus {
    guard(|| {
        non_null(out, "out")?;
        let path = string(path, "path")?;
        let file = std::fs::File::open(Path::new(path)).map_err(|e| Failure(EpfStatus::IoError, format!("{path}: {e}")))?;
        let (inner, _) = timeseries::ingest_csv(file)?;
        *out = Box::into_raw(Box::new(EpfPanel { inner }));
        Ok(())
    })
}

/// Builds a panel from day-major arrays of `days * 24` values each.
///
/// # Safety
/// Each array must hold `days * 24` values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn epf_panel_from_arrays(
    year: i32,
    month: u32,
    day: u32,
    days: usize,
    price: *const f64,
    load_da: *const f64,
    res_da: *const f64,
    out: *mut *mut EpfPanel,
) -> EpfStatus {
    guard(|| {
        non_null(out, "out")?;
        let start = chrono::NaiveDate::from_ymd_opt(year, month, day).ok_or_else(|| invalid("invalid start date"))?;
        let inner = HourlyPanel::new(
            start,
            day_rows(price, days, "price")?,
            day_rows(load_da, days, "load_da")?,
            day_rows(res_da, days, "res_da")?,
        )?;
        *out = Box::into_raw(Box::new(EpfPanel { inner }));
        Ok(())
    })
}

/// Number of days in the panel; 0 for a null handle.
///
/// # Safety
/// `panel` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn epf_panel_days(panel: *const EpfPanel) -> usize {
    panel.as_ref().map_or(0, |p| p.inner.days())
}

/// # Safety
/// `panel` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn epf_panel_free(panel: *mut EpfPanel) {
    if !panel.is_null() {
        drop(Box::from_raw(panel));
    }
}

/// Run configuration with all defaults; change it with [`epf_config_set`].
pub struct EpfConfig {
    inner: RunConfig,
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn epf_config_new(out: *mut *mut EpfConfig) -> EpfStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = Box::into_raw(Box::new(EpfConfig {
            inner: RunConfig::default(),
        }));
        Ok(())
    })
}

/// Sets one configuration key, as in the CLI config file.
///
/// # Safety
/// `config` must be live; `key` and `value` nul-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn epf_config_set(config: *mut EpfConfig, key: *const c_char, value: *const c_char) -> EpfStatus {
    guard(|| {
        non_null(config, "config")?;
        let (k, v) = (string(key, "key")?, string(value, "value")?);
        (*config).inner.set(k, v)?;
        Ok(())
    })
}

/// # Safety
/// `config` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn epf_config_free(config: *mut EpfConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Forecasts of every variant over the test days.
pub struct EpfForecasts {
    matrix: ForecastMatrix,
    names: Vec<CString>,
    failures: usize,
}

/// Backtests days `test_start..=test_end` (0-based panel days). Failed
/// cells are NaN and counted by [`epf_forecasts_failure_count`].
///
/// # Safety
/// `panel` and `config` must be live handles; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn epf_backtest_run(
    panel: *const EpfPanel,
    config: *const EpfConfig,
    test_start: usize,
    test_end: usize,
    out: *mut *mut EpfForecasts,
) -> EpfStatus {
    guard(|| {
        non_null(panel, "panel")?;
        non_null(config, "config")?;
        non_null(out, "out")?;
        let cfg = &(*config).inner;
        let panel = match cfg.start_weekday {
            Some(w) => (*panel).inner.clone().with_start_weekday(w)?,
            None => (*panel).inner.clone(),
        };
        let bt_config = cfg.backtest_config()?;
        let run = || pipeline::run_backtest(&panel, bt_config, test_start, test_end);
        let output = match cfg.workers {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| invalid(e.to_string()))?
                .install(run),
            None => run(),
        }?;
        let names = output
            .matrix
            .variants()
            .iter()
            .map(|v| CString::new(v.to_string()).expect("variant names have no nul"))
            .collect();
        *out = Box::into_raw(Box::new(EpfForecasts {
            failures: output.failures.len(),
            matrix: output.matrix,
            names,
        }));
        Ok(())
    })
}

/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn epf_forecasts_variant_count(f: *const EpfForecasts) -> usize {
    f.as_ref().map_or(0, |f| f.names.len())
}

/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn epf_forecasts_day_count(f: *const EpfForecasts) -> usize {
    f.as_ref().map_or(0, |f| f.matrix.days().len())
}

/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn epf_forecasts_failure_count(f: *const EpfForecasts) -> usize {
    f.as_ref().map_or(0, |f| f.failures)
}

/// Name such as `eSCLEAR-MAS`, owned by the handle; null when out of range.
///
/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn epf_forecasts_variant_name(f: *const EpfForecasts, variant: usize) -> *const c_char {
    f.as_ref()
        .and_then(|f| f.names.get(variant))
        .map_or(ptr::null(), |n| n.as_ptr())
}

/// Panel day index of test day `day`.
///
/// # Safety
/// `f` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn epf_forecasts_day(f: *const EpfForecasts, day: usize, out: *mut usize) -> EpfStatus {
    guard(|| {
        non_null(f, "forecasts")?;
        non_null(out, "out")?;
        *out = *(*f).matrix.days().get(day).ok_or_else(|| invalid("day out of range"))?;
        Ok(())
    })
}

/// Copies the 24 hourly forecasts of one variant and test day into `out`.
///
/// # Safety
/// `f` must be a live handle; `out` must hold 24 values.
#[no_mangle]
pub unsafe extern "C" fn epf_forecasts_get(f: *const EpfForecasts, variant: usize, day: usize, out: *mut f64) -> EpfStatus {
    guard(|| {
        non_null(f, "forecasts")?;
        let m = &(*f).matrix;
        let v = *m.variants().get(variant).ok_or_else(|| invalid("variant out of range"))?;
        let d = *m.days().get(day).ok_or_else(|| invalid("day out of range"))?;
        slice_mut(out, HOURS, "out")?.copy_from_slice(m.get(v, d).expect("cell exists"));
        Ok(())
    })
}

/// # Safety
/// `f` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn epf_forecasts_free(f: *mut EpfForecasts) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Median and MAD of a calibration window.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpfNormalizer {
    pub median: f64,
    pub mad: f64,
}

impl From<EpfNormalizer> for Normalizer {
    fn from(n: EpfNormalizer) -> Self {
        Normalizer { med: n.median, mad: n.mad }
    }
}

/// # Safety
/// `values` must hold `len` values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn epf_vst_fit(values: *const f64, len: usize, out: *mut EpfNormalizer) -> EpfStatus {
    guard(|| {
        non_null(out, "out")?;
        let n = Normalizer::fit(slice(values, len, "values")?)?;
        *out = EpfNormalizer { median: n.med, mad: n.mad };
        Ok(())
    })
}

/// `asinh` transform of `len` values; `input` and `output` may alias.
///
/// # Safety
/// Both buffers must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn epf_vst_transform(norm: EpfNormalizer, input: *const f64, len: usize, output: *mut f64) -> EpfStatus {
    map_values(input, len, output, |v| Normalizer::from(norm).transform(v))
}

/// Inverse of [`epf_vst_transform`].
///
/// # Safety
/// Both buffers must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn epf_vst_inverse(norm: EpfNormalizer, input: *const f64, len: usize, output: *mut f64) -> EpfStatus {
    map_values(input, len, output, |v| Normalizer::from(norm).inverse(v))
}

unsafe fn map_values(
    input: *const f64,
    len: usize,
    output: *mut f64,
    f: impl Fn(f64) -> epfcast::Result<f64>,
) -> EpfStatus {
    guard(|| {
        let values = slice(input, len, "input")?.to_vec();
        let out = slice_mut(output, len, "output")?;
        for (o, v) in out.iter_mut().zip(values) {
            *o = f(v)?;
        }
        Ok(())
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpfSmoother {
    /// Centered moving average; level in days (1, 7, 28, 56, 91).
    MovingAverage = 0,
    /// Wavelet approximation; level J (5, 7, 9, 10, 11).
    Wavelet = 1,
}

/// Long-term seasonal component of `len` hourly values.
///
/// # Safety
/// `input` and `output` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn epf_ltsc_smooth(
    smoother: EpfSmoother,
    level: u32,
    input: *const f64,
    len: usize,
    output: *mut f64,
) -> EpfStatus {
    guard(|| {
        let spec = match smoother {
            EpfSmoother::MovingAverage => LtscSpec::moving_average(level)?,
            EpfSmoother::Wavelet => LtscSpec::wavelet(level)?,
        };
        let s = spec.smooth(slice(input, len, "input")?)?;
        slice_mut(output, len, "output")?.copy_from_slice(&s);
        Ok(())
    })
}

/// Fitted linear model in original units.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpfLassoFit {
    pub intercept: f64,
    pub lambda: f64,
    pub nonzero: usize,
}

unsafe fn lasso_inputs(x: *const f64, nrows: usize, ncols: usize, y: *const f64) -> Result<(LassoProblem, Vec<f64>), Failure> {
    let n = nrows.checked_mul(ncols).ok_or_else(|| invalid("size overflow"))?;
    let m = Matrix::from_row_major(nrows, ncols, slice(x, n, "x")?.to_vec())?;
    Ok((LassoProblem::new(&m)?, slice(y, nrows, "y")?.to_vec()))
}

unsafe fn write_fit(model: &FittedModel, coefficients: *mut f64, out: *mut EpfLassoFit) -> Result<(), Failure> {
    non_null(out, "out")?;
    slice_mut(coefficients, model.coefficients.len(), "coefficients")?.copy_from_slice(&model.coefficients);
    *out = EpfLassoFit {
        intercept: model.intercept,
        lambda: model.lambda,
        nonzero: model.coefficients.iter().filter(|c| **c != 0.0).count(),
    };
    Ok(())
}

/// LASSO at a fixed `lambda` on a row-major `nrows x ncols` matrix. The
/// regressors are standardized internally; `coefficients` receives `ncols`
/// values in original units.
///
/// # Safety
/// `x` holds `nrows * ncols` values, `y` holds `nrows`, `coefficients`
/// holds `ncols`; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn epf_lasso_fit(
    x: *const f64,
    nrows: usize,
    ncols: usize,
    y: *const f64,
    lambda: f64,
    coefficients: *mut f64,
    out: *mut EpfLassoFit,
) -> EpfStatus {
    guard(|| {
        let (problem, y) = lasso_inputs(x, nrows, ncols, y)?;
        let model = problem.fit(&y, lambda, &LassoOptions::default())?;
        write_fit(&model, coefficients, out)
    })
}

/// LASSO with lambda chosen by AIC along the default grid.
///
/// # Safety
/// As for [`epf_lasso_fit`].
#[no_mangle]
pub unsafe extern "C" fn epf_lasso_select(
    x: *const f64,
    nrows: usize,
    ncols: usize,
    y: *const f64,
    coefficients: *mut f64,
    out: *mut EpfLassoFit,
) -> EpfStatus {
    guard(|| {
        let (problem, y) = lasso_inputs(x, nrows, ncols, y)?;
        let sel = problem.select_lambda(&y, &LassoOptions::default())?;
        write_fit(&sel.model, coefficients, out)
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpfDmResult {
    pub statistic: f64,
    /// Small values mean the second model is more accurate.
    pub p_value: f64,
    pub days: usize,
}

/// Diebold-Mariano test on day-major forecast errors (`days * 24` each).
///
/// # Safety
/// Both buffers must hold `days * 24` values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn epf_dm_test(errors_a: *const f64, errors_b: *const f64, days: usize, out: *mut EpfDmResult) -> EpfStatus {
    guard(|| {
        non_null(out, "out")?;
        let r = epfcast::eval::dm_test(&day_rows(errors_a, days, "errors_a")?, &day_rows(errors_b, days, "errors_b")?)?;
        *out = EpfDmResult {
            statistic: r.statistic,
            p_value: r.p_value,
            days: r.n_days,
        };
        Ok(())
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpfBattery {
    pub capacity: f64,
    pub min_level: f64,
    pub efficiency: f64,
    pub trade_volume: f64,
    pub charge_first: bool,
}

impl From<EpfBattery> for BatterySpec {
    fn from(b: EpfBattery) -> Self {
        BatterySpec {
            capacity: b.capacity,
            min_level: b.min_level,
            efficiency: b.efficiency,
            trade_volume: b.trade_volume,
            charge_first: b.charge_first,
        }
    }
}

#[no_mangle]
pub extern "C" fn epf_battery_default() -> EpfBattery {
    let b = BatterySpec::default();
    EpfBattery {
        capacity: b.capacity,
        min_level: b.min_level,
        efficiency: b.efficiency,
        trade_volume: b.trade_volume,
        charge_first: b.charge_first,
    }
}

/// One day's trade; hours are 0-based.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpfTrade {
    pub buy_hour: usize,
    pub sell_hour: usize,
    pub profit: f64,
    pub traded: bool,
}

impl From<trading::DayTrade> for EpfTrade {
    fn from(t: trading::DayTrade) -> Self {
        EpfTrade {
            buy_hour: t.h1,
            sell_hour: t.h2,
            profit: t.profit,
            traded: t.traded,
        }
    }
}

fn checked_battery(b: EpfBattery) -> Result<BatterySpec, Failure> {
    let spec = BatterySpec::from(b);
    spec.validate()?;
    Ok(spec)
}

/// Trades on `forecast` (24 values) and settles at `prices` (24 values).
///
/// # Safety
/// Both buffers must hold 24 values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn epf_trade_day(battery: EpfBattery, prices: *const f64, forecast: *const f64, out: *mut EpfTrade) -> EpfStatus {
    guard(|| {
        non_null(out, "out")?;
        let spec = checked_battery(battery)?;
        *out = trading::strategy_profit(&day_row(prices, "prices")?, &day_row(forecast, "forecast")?, &spec).into();
        Ok(())
    })
}

/// Best trade with perfect knowledge of `prices` (24 values).
///
/// # Safety
/// `prices` must hold 24 values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn epf_crystal_ball_day(battery: EpfBattery, prices: *const f64, out: *mut EpfTrade) -> EpfStatus {
    guard(|| {
        non_null(out, "out")?;
        let spec = checked_battery(battery)?;
        *out = trading::crystal_ball_profit(&day_row(prices, "prices")?, &spec).into();
        Ok(())
    })
}
