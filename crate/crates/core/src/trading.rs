//! Day-ahead battery arbitrage: one charge and one discharge per day.

use crate::error::{Error, Result};
use crate::timeseries::{DayRow, HOURS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatterySpec {
    /// MWh.
    pub capacity: f64,
    /// MWh that must stay stored.
    pub min_level: f64,
    /// Per direction.
    pub efficiency: f64,
    /// MWh bought and sold per day.
    pub trade_volume: f64,
    /// Only allow charging before discharging within the day.
    pub charge_first: bool,
}

impl Default for BatterySpec {
    fn default() -> Self {
        Self {
            capacity: 1.25,
            min_level: 0.25,
            efficiency: 0.9,
            trade_volume: 1.0,
            charge_first: false,
        }
    }
}

impl BatterySpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(Error::Config(format!("efficiency {} outside (0, 1]", self.efficiency)));
        }
        if !(self.min_level >= 0.0 && self.min_level < self.capacity) {
            return Err(Error::Config(format!(
                "min level {} must lie in [0, capacity {})",
                self.min_level, self.capacity
            )));
        }
        if !(self.trade_volume > 0.0 && self.trade_volume.is_finite()) {
            return Err(Error::Config(format!("trade volume {} must be positive", self.trade_volume)));
        }
        Ok(())
    }

    /// Profit of buying at `prices[h1]` and selling at `prices[h2]`.
    pub fn profit(&self, prices: &DayRow, h1: usize, h2: usize) -> f64 {
        self.trade_volume * (self.efficiency * prices[h2] - prices[h1] / self.efficiency)
    }
}

/// A day's trade; hours are 0-based. `traded` is false when the forecast
/// gave no signal, in which case `profit` is 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DayTrade {
    pub h1: usize,
    pub h2: usize,
    pub profit: f64,
    pub traded: bool,
}

fn argmin(v: &DayRow) -> usize {
    (1..HOURS).fold(0, |best, h| if v[h] < v[best] { h } else { best })
}

fn argmax(v: &DayRow) -> usize {
    (1..HOURS).fold(0, |best, h| if v[h] > v[best] { h } else { best })
}

/// Best (buy, sell) pair for `values` with buy before sell; ties go to the
/// lexicographically first pair.
fn best_ordered_pair(values: &DayRow, spec: &BatterySpec) -> (usize, usize) {
    let mut best = (0, 1);
    let mut best_val = spec.profit(values, 0, 1);
    let mut low = 0;
    for h2 in 1..HOURS {
        let v = spec.profit(values, low, h2);
        if v > best_val {
            best = (low, h2);
            best_val = v;
        }
        if values[h2] < values[low] {
            low = h2;
        }
    }
    best
}

fn choose_pair(values: &DayRow, spec: &BatterySpec) -> Option<(usize, usize)> {
    if values.iter().all(|v| *v == values[0]) {
        return None;
    }
    if spec.charge_first {
        Some(best_ordered_pair(values, spec))
    } else {
        Some((argmin(values), argmax(values)))
    }
}

/// Upper bound: trade at the true cheapest and dearest hours. Flat prices
/// still trade, at hours 1 and 2.
pub fn crystal_ball_profit(prices: &DayRow, spec: &BatterySpec) -> DayTrade {
    let (h1, h2) = choose_pair(prices, spec).unwrap_or((0, 1));
    DayTrade {
        h1,
        h2,
        profit: spec.profit(prices, h1, h2),
        traded: true,
    }
}

/// Trade at the forecast's extreme hours, settle at actual prices. A flat
/// forecast means no trade.
pub fn strategy_profit(prices: &DayRow, forecast: &DayRow, spec: &BatterySpec) -> DayTrade {
    match choose_pair(forecast, spec) {
        Some((h1, h2)) => DayTrade {
            h1,
            h2,
            profit: spec.profit(prices, h1, h2),
            traded: true,
        },
        None => DayTrade {
            h1: 0,
            h2: 0,
            profit: 0.0,
            traded: false,
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DayOutcome {
    /// Index into the input series.
    pub index: usize,
    pub model: DayTrade,
    pub crystal_ball: DayTrade,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfitSummary {
    pub days: Vec<DayOutcome>,
    pub total: f64,
    pub crystal_ball_total: f64,
    pub fraction: f64,
    pub days_excluded: usize,
}

/// Sums daily profits over days where both series are finite.
pub fn aggregate_profits(actual: &[DayRow], forecast: &[DayRow], spec: &BatterySpec) -> Result<ProfitSummary> {
    if actual.len() != forecast.len() {
        return Err(Error::Shape(format!(
            "series cover {} and {} days",
            actual.len(),
            forecast.len()
        )));
    }
    let finite = |r: &DayRow| r.iter().all(|v| v.is_finite());
    let days: Vec<DayOutcome> = actual
        .iter()
        .zip(forecast)
        .enumerate()
        .filter(|(_, (a, f))| finite(a) && finite(f))
        .map(|(index, (a, f))| DayOutcome {
            index,
            model: strategy_profit(a, f, spec),
            crystal_ball: crystal_ball_profit(a, spec),
        })
        .collect();
    let total: f64 = days.iter().map(|d| d.model.profit).sum();
    let crystal_ball_total: f64 = days.iter().map(|d| d.crystal_ball.profit).sum();
    if crystal_ball_total <= 0.0 {
        return Err(Error::NonPositiveCrystalBall(crystal_ball_total));
    }
    Ok(ProfitSummary {
        days_excluded: actual.len() - days.len(),
        days,
        total,
        crystal_ball_total,
        fraction: total / crystal_ball_total,
    })
}
