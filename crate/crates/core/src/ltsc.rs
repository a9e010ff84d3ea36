//! Long-term seasonal component: extraction by moving average or wavelet
//! smoothing, and its day-ahead forecast.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::timeseries::{DayRow, HOURS};
use crate::wavelet::{self, FilterBank};

pub const MA_LEVELS: [u32; 5] = [1, 7, 28, 56, 91];
pub const WAVELET_LEVELS: [u32; 5] = [5, 7, 9, 10, 11];

/// Smoothing method and level of one individual decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LtscSpec {
    /// Centered moving average over `24 * days + 1` hourly observations.
    MovingAverage { days: u32 },
    /// Wavelet approximation `S_J` at level `J`.
    Wavelet { level: u32 },
}

impl LtscSpec {
    pub fn moving_average(days: u32) -> Result<Self> {
        if MA_LEVELS.contains(&days) {
            Ok(Self::MovingAverage { days })
        } else {
            Err(Error::InvalidLevel {
                method: "moving average",
                level: days,
            })
        }
    }

    pub fn wavelet(level: u32) -> Result<Self> {
        if WAVELET_LEVELS.contains(&level) {
            Ok(Self::Wavelet { level })
        } else {
            Err(Error::InvalidLevel {
                method: "wavelet",
                level,
            })
        }
    }

    /// The ten default decompositions: five MA levels then five wavelet levels.
    pub fn defaults() -> Vec<Self> {
        MA_LEVELS
            .iter()
            .map(|&days| Self::MovingAverage { days })
            .chain(WAVELET_LEVELS.iter().map(|&level| Self::Wavelet { level }))
            .collect()
    }

    pub fn is_moving_average(&self) -> bool {
        matches!(self, Self::MovingAverage { .. })
    }

    /// Minimum input length the smoother accepts.
    pub fn min_len(&self) -> usize {
        match *self {
            Self::MovingAverage { days } => HOURS * days as usize + 1,
            Self::Wavelet { level } => 1usize << level,
        }
    }

    pub fn smooth(&self, x: &[f64]) -> Result<Vec<f64>> {
        match *self {
            Self::MovingAverage { days } => ma_smooth(x, days),
            Self::Wavelet { level } => wavelet_smooth(x, level),
        }
    }
}

impl fmt::Display for LtscSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::MovingAverage { days } => write!(f, "MA{days}"),
            Self::Wavelet { level } => write!(f, "S{level}"),
        }
    }
}

impl FromStr for LtscSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unknown LTSC spec `{s}` (expected MA<days> or S<level>)"));
        if let Some(rest) = s.strip_prefix("MA") {
            Self::moving_average(rest.parse().map_err(|_| bad())?)
        } else if let Some(rest) = s.strip_prefix('S') {
            Self::wavelet(rest.parse().map_err(|_| bad())?)
        } else {
            Err(bad())
        }
    }
}

/// Centered moving average with half-width `k = 12 * level_days`. Near the
/// edges the window is truncated to the available samples.
pub fn ma_smooth(x: &[f64], level_days: u32) -> Result<Vec<f64>> {
    if level_days == 0 {
        return Err(Error::InvalidLevel {
            method: "moving average",
            level: 0,
        });
    }
    let k = 12 * level_days as usize;
    let needed = 2 * k + 1;
    if x.len() < needed {
        return Err(Error::TooShort {
            needed,
            got: x.len(),
        });
    }
    Ok(centered_mean(x, k))
}

/// Windowed means with half-width `k`, truncated at the edges. Sums are
/// taken relative to `x[0]`, which makes constant inputs exact.
fn centered_mean(x: &[f64], k: usize) -> Vec<f64> {
    let n = x.len();
    let origin = x[0];
    let mut prefix = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    prefix.push(0.0);
    for v in x {
        acc += v - origin;
        prefix.push(acc);
    }
    (0..n)
        .map(|t| {
            let lo = t.saturating_sub(k);
            let hi = (t + k).min(n - 1);
            (prefix[hi + 1] - prefix[lo]) / (hi - lo + 1) as f64 + origin
        })
        .collect()
}

fn db24() -> &'static FilterBank {
    static BANK: OnceLock<FilterBank> = OnceLock::new();
    BANK.get_or_init(FilterBank::daubechies24)
}

/// Wavelet approximation at level `levels` with db24 filters and symmetric
/// boundary extension.
pub fn wavelet_smooth(x: &[f64], levels: u32) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(Error::Empty("wavelet input"));
    }
    // The transform is linear and reproduces constants, so shifting by x[0]
    // changes nothing except making constant inputs exact.
    let origin = x[0];
    let shifted: Vec<f64> = x.iter().map(|v| v - origin).collect();
    let mut s = wavelet::approximation(db24(), &shifted, levels)?;
    s.iter_mut().for_each(|v| *v += origin);
    Ok(s)
}

/// Additive split of a series into its LTSC and the remainder.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub ltsc: Vec<f64>,
    pub stochastic: Vec<f64>,
}

impl Decomposition {
    pub fn new(x: &[f64], spec: LtscSpec) -> Result<Self> {
        let ltsc = spec.smooth(x)?;
        let stochastic = x.iter().zip(&ltsc).map(|(p, t)| p - t).collect();
        Ok(Self { ltsc, stochastic })
    }
}

/// LTSC over the calibration window plus its forecast for the target day.
#[derive(Debug, Clone, PartialEq)]
pub struct LtscForecast {
    pub in_window: Vec<f64>,
    pub target: DayRow,
}

fn last_day(v: &[f64]) -> DayRow {
    let mut out = [0.0; HOURS];
    out.copy_from_slice(&v[v.len() - HOURS..]);
    out
}

/// Naive forecast: the last 24 smoothed in-window values are copied.
pub fn naive_ltsc_forecast(window_prices: &[f64], spec: LtscSpec) -> Result<LtscForecast> {
    check_window(window_prices)?;
    let in_window = spec.smooth(window_prices)?;
    let target = last_day(&in_window);
    Ok(LtscForecast { in_window, target })
}

/// Extrapolated forecast: the window is extended by the 24 base-model price
/// forecasts of the target day before smoothing, and the last 24 smoothed
/// values are the forecast.
pub fn extrapolated_ltsc(
    window_prices: &[f64],
    base_forecast: &[f64],
    spec: LtscSpec,
) -> Result<LtscForecast> {
    check_window(window_prices)?;
    if base_forecast.len() != HOURS {
        return Err(Error::Shape(format!(
            "base forecast must have {HOURS} values, got {}",
            base_forecast.len()
        )));
    }
    let mut extended = Vec::with_capacity(window_prices.len() + HOURS);
    extended.extend_from_slice(window_prices);
    extended.extend_from_slice(base_forecast);
    let mut full = spec.smooth(&extended)?;
    let target = last_day(&full);
    full.truncate(window_prices.len());
    Ok(LtscForecast {
        in_window: full,
        target,
    })
}

/// Full smoothed series of the extended window, for plotting.
pub fn extended_ltsc(window_prices: &[f64], base_forecast: &[f64], spec: LtscSpec) -> Result<Vec<f64>> {
    let f = extrapolated_ltsc(window_prices, base_forecast, spec)?;
    let mut full = f.in_window;
    full.extend_from_slice(&f.target);
    Ok(full)
}

fn check_window(window_prices: &[f64]) -> Result<()> {
    if window_prices.is_empty() || window_prices.len() % HOURS != 0 {
        return Err(Error::Shape(format!(
            "window must hold whole days of {HOURS} hours, got {} values",
            window_prices.len()
        )));
    }
    Ok(())
}

/// Writes `t,ltsc` rows.
pub fn write_ltsc_csv<W: Write>(writer: W, ltsc: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["t", "ltsc"])?;
    for (t, v) in ltsc.iter().enumerate() {
        w.write_record([t.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
