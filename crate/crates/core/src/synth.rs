//! Synthetic hourly market data with a known long-term seasonal component.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use chrono::{Datelike, NaiveDate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::parse_key_values;
use crate::error::{Error, Result};
use crate::timeseries::{DayRow, HourlyPanel, HOURS};

/// Price = level + trend + weekly + daily profile + linear load/RES
/// response + AR(1) noise.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub seed: u64,
    pub days: usize,
    pub start_date: NaiveDate,
    pub base_price: f64,
    /// Amplitude of the slow sinusoidal trend.
    pub trend_amplitude: f64,
    pub trend_period_days: f64,
    /// Weekend price drop.
    pub weekly_amplitude: f64,
    pub daily_amplitude: f64,
    /// Marginal standard deviation of the hourly AR(1) price noise.
    pub noise_std: f64,
    pub ar_coefficient: f64,
    pub load_mean: f64,
    pub load_amplitude: f64,
    pub res_mean: f64,
    pub res_amplitude: f64,
    /// Standard deviation of white noise on both exogenous series.
    pub exog_noise_std: f64,
    /// EUR/MWh per MWh of load above its mean.
    pub load_coefficient: f64,
    /// EUR/MWh per MWh of RES above its mean.
    pub res_coefficient: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            seed: 42,
            days: 760,
            start_date: NaiveDate::from_ymd_opt(2015, 1, 1).expect("valid date"),
            base_price: 45.0,
            trend_amplitude: 15.0,
            trend_period_days: 365.0,
            weekly_amplitude: 6.0,
            daily_amplitude: 8.0,
            noise_std: 5.0,
            ar_coefficient: 0.9,
            load_mean: 50_000.0,
            load_amplitude: 8_000.0,
            res_mean: 15_000.0,
            res_amplitude: 8_000.0,
            exog_noise_std: 1_500.0,
            load_coefficient: 5e-4,
            res_coefficient: -8e-4,
        }
    }
}

macro_rules! param_fields {
    ($m:ident) => {
        $m!(
            seed,
            days,
            base_price,
            trend_amplitude,
            trend_period_days,
            weekly_amplitude,
            daily_amplitude,
            noise_std,
            ar_coefficient,
            load_mean,
            load_amplitude,
            res_mean,
            res_amplitude,
            exog_noise_std,
            load_coefficient,
            res_coefficient
        )
    };
}

impl SynthParams {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let bad = || Error::Config(format!("{key}: cannot parse `{v}`"));
        macro_rules! assign {
            ($($f:ident),*) => {
                match key.trim() {
                    "start_date" => {
                        self.start_date = NaiveDate::parse_from_str(v, "%Y-%m-%d").map_err(|_| bad())?
                    }
                    $(stringify!($f) => self.$f = v.parse().map_err(|_| bad())?,)*
                    other => return Err(Error::Config(format!("unknown synth parameter `{other}`"))),
                }
            };
        }
        param_fields!(assign);
        Ok(())
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (k, v) in parse_key_values(text)? {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    /// The sidecar file format; reading it back reproduces `self`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "start_date = {}", self.start_date.format("%Y-%m-%d")).expect("string write");
        macro_rules! emit {
            ($($f:ident),*) => {
                $(writeln!(s, "{} = {}", stringify!($f), self.$f).expect("string write");)*
            };
        }
        param_fields!(emit);
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.days == 0 {
            return Err(Error::Config("days must be positive".into()));
        }
        if !(self.ar_coefficient.abs() < 1.0) {
            return Err(Error::Config("AR coefficient must lie in (-1, 1)".into()));
        }
        if self.noise_std < 0.0 || self.exog_noise_std < 0.0 || self.trend_period_days <= 0.0 {
            return Err(Error::Config("noise levels and trend period must be non-negative".into()));
        }
        Ok(())
    }

    /// Slow trend at hour `t` counted from the first hour.
    pub fn trend(&self, t: usize) -> f64 {
        self.trend_amplitude * (TAU * t as f64 / (HOURS as f64 * self.trend_period_days)).sin()
    }

    fn weekly(&self, weekday: u8) -> f64 {
        match weekday {
            6 => -0.6 * self.weekly_amplitude,
            7 => -self.weekly_amplitude,
            _ => 0.0,
        }
    }

    fn daily(&self, h: usize) -> f64 {
        let x = TAU * h as f64 / HOURS as f64;
        self.daily_amplitude * (-0.6 * x.cos() - 0.4 * (2.0 * x).cos())
    }

    fn load_profile(&self, weekday: u8, h: usize) -> f64 {
        let x = TAU * (h as f64 - 14.0) / HOURS as f64;
        let weekend = if weekday >= 6 { 0.85 } else { 1.0 };
        weekend * (self.load_mean + self.load_amplitude * x.cos())
    }

    fn res_profile(&self, h: usize) -> f64 {
        let x = TAU * (h as f64 - 13.0) / HOURS as f64;
        self.res_mean + self.res_amplitude * x.cos()
    }

    /// Deterministic part of the price, excluding the trend.
    fn periodic_price(&self, weekday: u8, h: usize, load: f64, res: f64) -> f64 {
        self.base_price
            + self.weekly(weekday)
            + self.daily(h)
            + self.load_coefficient * (load - self.load_mean)
            + self.res_coefficient * (res - self.res_mean)
    }
}

/// Generates a panel; identical parameters give bit-identical output.
pub fn generate(params: &SynthParams) -> Result<HourlyPanel> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let phi = params.ar_coefficient;
    let innovation_sd = params.noise_std * (1.0 - phi * phi).sqrt();
    let mut ar = params.noise_std * normal();

    let start_weekday = params.start_date.weekday().number_from_monday() as u8;
    let mut price = Vec::with_capacity(params.days);
    let mut load = Vec::with_capacity(params.days);
    let mut res = Vec::with_capacity(params.days);
    for d in 0..params.days {
        let weekday = ((start_weekday as usize - 1 + d) % 7 + 1) as u8;
        let (mut p, mut l, mut r): (DayRow, DayRow, DayRow) = ([0.0; HOURS], [0.0; HOURS], [0.0; HOURS]);
        for h in 0..HOURS {
            let t = d * HOURS + h;
            l[h] = params.load_profile(weekday, h) + params.exog_noise_std * normal();
            r[h] = params.res_profile(h) + params.exog_noise_std * normal();
            if t > 0 {
                ar = phi * ar + innovation_sd * normal();
            }
            p[h] = params.trend(t) + params.periodic_price(weekday, h, l[h], r[h]) + ar;
        }
        price.push(p);
        load.push(l);
        res.push(r);
    }
    HourlyPanel::new(params.start_date, price, load, res)
}
