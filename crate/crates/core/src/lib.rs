//! Day-ahead electricity price forecasting with seasonal-component models.
//!
//! The crate decomposes hourly prices into a long-term seasonal component
//! (LTSC) and a stochastic remainder, forecasts the remainder with per-hour
//! ARX or LASSO-estimated (LEAR) regressions on asinh-transformed data, and
//! adds back an LTSC forecast. Two LTSC forecasts are provided: the naive
//! copy of the last 24 smoothed values and the extrapolated variant, which
//! smooths the price series extended by a base-model forecast of the target
//! day.
//!
//! Around the forecasting core sit the evaluation tools: rolling-window
//! backtesting, MAE/RMSE and rolling relative MAE, the multivariate
//! Diebold-Mariano test and a battery trading-strategy profit evaluator.

pub mod config;
pub mod error;
pub mod eval;
pub mod ltsc;
pub mod pipeline;
pub mod regress;
pub mod report;
pub mod synth;
pub mod timeseries;
pub mod trading;
pub mod vst;
pub mod wavelet;

pub use error::{Error, Result};
pub use ltsc::{LtscForecast, LtscSpec};
pub use pipeline::{Backtester, ForecastMatrix, ModelClass, VariantId};
pub use timeseries::{CalibrationWindow, DayRow, HourlyPanel, HOURS};
pub use vst::Normalizer;
