//! Flat `key = value` run configuration.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::ltsc::{LtscSpec, MA_LEVELS, WAVELET_LEVELS};
use crate::pipeline::{BacktestConfig, Decomposition, ModelClass, Pool, DEFAULT_CALIBRATION_DAYS};
use crate::regress::LassoOptions;
use crate::trading::BatterySpec;

/// Parses `key = value` lines. `#` starts a comment; blank lines are skipped.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: i as u64 + 1,
            message: format!("expected key = value, got `{line}`"),
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Every recognised key with its default, as printed by `--help`.
pub const KEYS: &[(&str, &str)] = &[
    ("data_path", "(none)"),
    ("calibration_days", "1456"),
    ("test_start", "first day with a full calibration window"),
    ("test_end", "last day of the data"),
    ("model_classes", "ARX,LEAR"),
    ("decompositions", "NONE,SC,eSC"),
    ("pools", "MA,S,MAS"),
    ("ma_levels", "1,7,28,56,91"),
    ("wavelet_levels", "5,7,9,10,11"),
    ("battery_capacity", "1.25"),
    ("battery_min_level", "0.25"),
    ("battery_efficiency", "0.9"),
    ("trade_volume", "1.0"),
    ("require_charge_first", "false"),
    ("start_weekday", "weekday of the first date"),
    ("rmae_window", "365"),
    ("workers", "number of CPUs"),
    ("output_dir", "out"),
    ("seed", "42"),
];

pub fn keys_help() -> String {
    let mut s = String::from("Config keys (file `key = value`, or --set key=value):\n");
    for (k, d) in KEYS {
        s.push_str(&format!("  {k:<22} default: {d}\n"));
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub data_path: Option<PathBuf>,
    pub calibration_days: usize,
    pub test_start: Option<NaiveDate>,
    pub test_end: Option<NaiveDate>,
    pub model_classes: Vec<ModelClass>,
    pub decompositions: Vec<Decomposition>,
    pub pools: Vec<Pool>,
    pub ma_levels: Vec<u32>,
    pub wavelet_levels: Vec<u32>,
    pub battery: BatterySpec,
    pub start_weekday: Option<u8>,
    pub rmae_window: usize,
    /// `None` uses every available CPU.
    pub workers: Option<usize>,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            data_path: None,
            calibration_days: DEFAULT_CALIBRATION_DAYS,
            test_start: None,
            test_end: None,
            model_classes: ModelClass::ALL.to_vec(),
            decompositions: Decomposition::ALL.to_vec(),
            pools: Pool::ALL.to_vec(),
            ma_levels: MA_LEVELS.to_vec(),
            wavelet_levels: WAVELET_LEVELS.to_vec(),
            battery: BatterySpec::default(),
            start_weekday: None,
            rmae_window: crate::eval::RMAE_WINDOW,
            workers: None,
            output_dir: PathBuf::from("out"),
            seed: 42,
        }
    }
}

fn list<T>(v: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(f).collect()
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse `{v}`")))
}

fn date(key: &str, v: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(v.trim(), "%Y-%m-%d").map_err(|e| Error::Config(format!("{key}: {e}")))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let mut c = Self::default();
        c.apply_text(&std::fs::read_to_string(path)?)?;
        Ok(c)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (k, v) in parse_key_values(text)? {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "data_path" => self.data_path = Some(PathBuf::from(v)),
            "calibration_days" => self.calibration_days = num(key, v)?,
            "test_start" => self.test_start = Some(date(key, v)?),
            "test_end" => self.test_end = Some(date(key, v)?),
            "model_classes" => self.model_classes = list(v, str::parse)?,
            "decompositions" => self.decompositions = list(v, str::parse)?,
            "pools" => self.pools = list(v, str::parse)?,
            "ma_levels" => self.ma_levels = list(v, |s| num(key, s))?,
            "wavelet_levels" => self.wavelet_levels = list(v, |s| num(key, s))?,
            "battery_capacity" => self.battery.capacity = num(key, v)?,
            "battery_min_level" => self.battery.min_level = num(key, v)?,
            "battery_efficiency" => self.battery.efficiency = num(key, v)?,
            "trade_volume" => self.battery.trade_volume = num(key, v)?,
            "require_charge_first" => self.battery.charge_first = num(key, v)?,
            "start_weekday" => self.start_weekday = Some(num(key, v)?),
            "rmae_window" => self.rmae_window = num(key, v)?,
            "workers" => {
                let n: usize = num(key, v)?;
                if n == 0 {
                    return Err(Error::Config("workers must be positive".into()));
                }
                self.workers = Some(n);
            }
            "output_dir" => self.output_dir = PathBuf::from(v),
            "seed" => self.seed = num(key, v)?,
            other => return Err(Error::Config(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    pub fn specs(&self) -> Result<Vec<LtscSpec>> {
        let mut specs = Vec::new();
        for &d in &self.ma_levels {
            specs.push(LtscSpec::moving_average(d)?);
        }
        for &j in &self.wavelet_levels {
            specs.push(LtscSpec::wavelet(j)?);
        }
        Ok(specs)
    }

    pub fn backtest_config(&self) -> Result<BacktestConfig> {
        self.battery.validate()?;
        let c = BacktestConfig {
            calibration_days: self.calibration_days,
            classes: self.model_classes.clone(),
            decompositions: self.decompositions.clone(),
            pools: self.pools.clone(),
            specs: self.specs()?,
            lasso: LassoOptions::default(),
        };
        c.validate()?;
        Ok(c)
    }
}
