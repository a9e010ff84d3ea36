//! Day-level forecasting pipeline and rolling backtest.
//!
//! For each target day and model class the pipeline produces the base
//! forecast (VST applied to raw prices), ten single-decomposition forecasts
//! with the naive LTSC forecast, ten with the extrapolated LTSC forecast
//! (seeded by the base forecast), and the equal-weight -MA, -S and -MAS
//! combinations of each.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ltsc::{self, LtscForecast, LtscSpec};
use crate::regress::{arx_design, lear_design, ols_fit, LassoOptions, LassoProblem, ModelData};
use crate::timeseries::{CalibrationWindow, DayRow, HourlyPanel, HOURS};
use crate::vst::Normalizer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelClass {
    Arx,
    Lear,
}

impl ModelClass {
    pub const ALL: [ModelClass; 2] = [ModelClass::Arx, ModelClass::Lear];
}

impl fmt::Display for ModelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelClass::Arx => "ARX",
            ModelClass::Lear => "LEAR",
        })
    }
}

impl FromStr for ModelClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "ARX" => Ok(Self::Arx),
            "LEAR" => Ok(Self::Lear),
            other => Err(Error::Config(format!("unknown model class `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Decomposition {
    /// No seasonal decomposition.
    None,
    /// Naive LTSC forecast (`SC` prefix).
    Naive,
    /// Extrapolated LTSC forecast (`eSC` prefix).
    Extrapolated,
}

impl Decomposition {
    pub const ALL: [Decomposition; 3] = [Decomposition::None, Decomposition::Naive, Decomposition::Extrapolated];

    fn prefix(&self) -> &'static str {
        match self {
            Decomposition::None => "",
            Decomposition::Naive => "SC",
            Decomposition::Extrapolated => "eSC",
        }
    }
}

impl FromStr for Decomposition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "NONE" => Ok(Self::None),
            "SC" => Ok(Self::Naive),
            "eSC" => Ok(Self::Extrapolated),
            other => Err(Error::Config(format!("unknown decomposition `{other}`"))),
        }
    }
}

/// Pool of individual decompositions averaged into one forecast.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pool {
    Ma,
    S,
    Mas,
}

impl Pool {
    pub const ALL: [Pool; 3] = [Pool::Ma, Pool::S, Pool::Mas];

    pub fn contains(&self, spec: &LtscSpec) -> bool {
        match self {
            Pool::Ma => spec.is_moving_average(),
            Pool::S => !spec.is_moving_average(),
            Pool::Mas => true,
        }
    }
}

impl fmt::Display for Pool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pool::Ma => "MA",
            Pool::S => "S",
            Pool::Mas => "MAS",
        })
    }
}

impl FromStr for Pool {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "MA" => Ok(Self::Ma),
            "S" => Ok(Self::S),
            "MAS" => Ok(Self::Mas),
            other => Err(Error::Config(format!("unknown pool `{other}`"))),
        }
    }
}

/// One reported forecast series, e.g. `LEAR`, `SCARX-S`, `eSCLEAR-MAS`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VariantId {
    pub class: ModelClass,
    pub decomposition: Decomposition,
    pub pool: Option<Pool>,
}

impl VariantId {
    pub fn base(class: ModelClass) -> Self {
        Self {
            class,
            decomposition: Decomposition::None,
            pool: None,
        }
    }

    pub fn combined(class: ModelClass, decomposition: Decomposition, pool: Pool) -> Result<Self> {
        if decomposition == Decomposition::None {
            return Err(Error::Config("a pool requires a seasonal decomposition".into()));
        }
        Ok(Self {
            class,
            decomposition,
            pool: Some(pool),
        })
    }

    /// The naive-LTSC counterpart of an extrapolated variant.
    pub fn naive_counterpart(&self) -> Option<Self> {
        (self.decomposition == Decomposition::Extrapolated).then_some(Self {
            decomposition: Decomposition::Naive,
            ..*self
        })
    }

    /// All 14 variants in report order.
    pub fn all() -> Vec<Self> {
        BacktestConfig::default().variants()
    }
}

impl fmt::Display for VariantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.decomposition.prefix(), self.class)?;
        if let Some(p) = self.pool {
            write!(f, "-{p}")?;
        }
        Ok(())
    }
}

impl FromStr for VariantId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unknown variant `{s}`"));
        let (head, pool) = match s.split_once('-') {
            Some((h, p)) => (h, Some(p.parse::<Pool>()?)),
            None => (s, None),
        };
        let (decomposition, class) = if let Some(c) = head.strip_prefix("eSC") {
            (Decomposition::Extrapolated, c)
        } else if let Some(c) = head.strip_prefix("SC") {
            (Decomposition::Naive, c)
        } else {
            (Decomposition::None, head)
        };
        let class: ModelClass = class.parse().map_err(|_| bad())?;
        match (decomposition, pool) {
            (Decomposition::None, None) => Ok(Self::base(class)),
            (Decomposition::None, Some(_)) | (_, None) => Err(bad()),
            (d, Some(p)) => Self::combined(class, d, p),
        }
    }
}

/// Which variants a backtest produces.
#[derive(Debug, Clone, PartialEq)]
pub struct BacktestConfig {
    pub calibration_days: usize,
    pub classes: Vec<ModelClass>,
    pub decompositions: Vec<Decomposition>,
    pub pools: Vec<Pool>,
    pub specs: Vec<LtscSpec>,
    pub lasso: LassoOptions,
}

pub const DEFAULT_CALIBRATION_DAYS: usize = 1456;

impl Default for BacktestConfig {
    fn default() -> Self {
        Self {
            calibration_days: DEFAULT_CALIBRATION_DAYS,
            classes: ModelClass::ALL.to_vec(),
            decompositions: Decomposition::ALL.to_vec(),
            pools: Pool::ALL.to_vec(),
            specs: LtscSpec::defaults(),
            lasso: LassoOptions::default(),
        }
    }
}

impl BacktestConfig {
    pub fn variants(&self) -> Vec<VariantId> {
        let mut out = Vec::new();
        for &class in &self.classes {
            for &decomposition in &self.decompositions {
                if decomposition == Decomposition::None {
                    out.push(VariantId::base(class));
                } else {
                    for &pool in &self.pools {
                        out.push(VariantId {
                            class,
                            decomposition,
                            pool: Some(pool),
                        });
                    }
                }
            }
        }
        out
    }

    /// Individual decompositions some requested pool needs.
    pub fn active_specs(&self) -> Vec<LtscSpec> {
        let decomposed = self.decompositions.iter().any(|d| *d != Decomposition::None);
        self.specs
            .iter()
            .copied()
            .filter(|s| decomposed && self.pools.iter().any(|p| p.contains(s)))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.classes.is_empty() || self.decompositions.is_empty() {
            return Err(Error::Config("at least one model class and decomposition required".into()));
        }
        if self.calibration_days <= crate::regress::MAX_LAG + 1 {
            return Err(Error::Config(format!(
                "calibration window of {} days is too short",
                self.calibration_days
            )));
        }
        let decomposed = self.decompositions.iter().any(|d| *d != Decomposition::None);
        if decomposed {
            if self.pools.is_empty() {
                return Err(Error::Config("seasonal decomposition requested without pools".into()));
            }
            for pool in &self.pools {
                if !self.specs.iter().any(|s| pool.contains(s)) {
                    return Err(Error::Config(format!("pool {pool} has no member decompositions")));
                }
            }
            let window = self.calibration_days * HOURS;
            for s in &self.specs {
                if window < s.min_len() {
                    return Err(Error::Config(format!(
                        "{s} needs {} hourly values, window has {window}",
                        s.min_len()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Element-wise arithmetic mean of equally long forecasts.
pub fn combine(forecasts: &[DayRow]) -> Result<DayRow> {
    if forecasts.is_empty() {
        return Err(Error::Empty("forecast pool"));
    }
    let mut out = [0.0; HOURS];
    for f in forecasts {
        for (o, v) in out.iter_mut().zip(f) {
            *o += v;
        }
    }
    let n = forecasts.len() as f64;
    out.iter_mut().for_each(|o| *o /= n);
    Ok(out)
}

/// Which series a predictor call models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    /// Raw prices, no decomposition.
    Base,
    /// Price minus an LTSC.
    Component { spec: LtscSpec, decomposition: Decomposition },
}

/// The "predict" step: forecasts the transformed series for the target day.
pub trait Predictor: Sync {
    fn predict(&self, class: ModelClass, stage: Stage, data: &ModelData<'_>) -> Result<DayRow>;
}

/// ARX by least squares, LEAR by LASSO with AIC-selected lambda; 24
/// independent hourly models each.
#[derive(Debug, Clone, Default)]
pub struct RegressionPredictor {
    pub lasso: LassoOptions,
}

impl Predictor for RegressionPredictor {
    fn predict(&self, class: ModelClass, _stage: Stage, data: &ModelData<'_>) -> Result<DayRow> {
        let hours: Vec<f64> = match class {
            ModelClass::Arx => (0..HOURS)
                .into_par_iter()
                .map(|h| {
                    let (design, row) = arx_design(data, h)?;
                    Ok(ols_fit(&design)?.predict(&row))
                })
                .collect::<Result<_>>()?,
            ModelClass::Lear => {
                let (x, targets, row) = lear_design(data)?;
                let problem = LassoProblem::new(&x)?;
                targets
                    .par_iter()
                    .map(|y| Ok(problem.select_lambda(y, &self.lasso)?.model.predict(&row)))
                    .collect::<Result<_>>()?
            }
        };
        let mut out = [0.0; HOURS];
        out.copy_from_slice(&hours);
        Ok(out)
    }
}

/// Source of LTSC forecasts.
pub trait LtscForecaster: Sync {
    fn naive(&self, window_prices: &[f64], spec: LtscSpec) -> Result<LtscForecast> {
        ltsc::naive_ltsc_forecast(window_prices, spec)
    }

    fn extrapolated(&self, window_prices: &[f64], base: &DayRow, spec: LtscSpec) -> Result<LtscForecast> {
        ltsc::extrapolated_ltsc(window_prices, base, spec)
    }
}

/// Moving-average and wavelet smoothing.
#[derive(Debug, Clone, Copy, Default)]
pub struct Smoothing;

impl LtscForecaster for Smoothing {}

/// Inputs shared by every forecast of one target day. Holds only
/// calibration-window prices; exogenous forecasts also cover the target day.
#[derive(Debug, Clone)]
pub struct DayContext {
    pub window: CalibrationWindow,
    /// Raw window prices, hour by hour.
    pub prices: Vec<f64>,
    pub x1: Vec<DayRow>,
    pub x2: Vec<DayRow>,
    pub weekdays: Vec<u8>,
}

impl DayContext {
    pub fn new(panel: &HourlyPanel, window: CalibrationWindow) -> Result<Self> {
        let target = window.target_day();
        if target >= panel.days() {
            return Err(Error::Config(format!("target day {target} beyond the panel")));
        }
        let days = window.days();
        let prices: Vec<f64> = panel.price()[days.clone()].iter().flatten().copied().collect();
        let with_target = window.first_day..=target;
        let normalize = |series: &[DayRow]| -> Result<Vec<DayRow>> {
            let calib: Vec<f64> = series[days.clone()].iter().flatten().copied().collect();
            let norm = Normalizer::fit(&calib)?;
            series[with_target.clone()]
                .iter()
                .map(|row| {
                    let mut out = [0.0; HOURS];
                    for (o, v) in out.iter_mut().zip(row) {
                        *o = norm.transform(*v)?;
                    }
                    Ok(out)
                })
                .collect()
        };
        Ok(Self {
            window,
            x1: normalize(panel.load_da())?,
            x2: normalize(panel.res_da())?,
            weekdays: with_target.map(|d| panel.weekday(d)).collect(),
            prices,
        })
    }
}

/// Forecasts of every variant for one day, failures kept as messages.
#[derive(Debug, Clone)]
pub struct DayForecasts {
    pub day: usize,
    pub values: Vec<(VariantId, std::result::Result<DayRow, String>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub day: usize,
    pub variant: VariantId,
    pub message: String,
}

/// Predicted prices per variant, test day and hour; failed cells are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastMatrix {
    variants: Vec<VariantId>,
    days: Vec<usize>,
    values: Vec<Vec<DayRow>>,
}

impl ForecastMatrix {
    pub fn new(variants: Vec<VariantId>, days: Vec<usize>) -> Self {
        let values = vec![vec![[f64::NAN; HOURS]; days.len()]; variants.len()];
        Self { variants, days, values }
    }

    pub fn variants(&self) -> &[VariantId] {
        &self.variants
    }

    /// Panel day indices of the rows, ascending.
    pub fn days(&self) -> &[usize] {
        &self.days
    }

    pub fn variant_index(&self, v: VariantId) -> Option<usize> {
        self.variants.iter().position(|x| *x == v)
    }

    pub fn day_index(&self, day: usize) -> Option<usize> {
        self.days.binary_search(&day).ok()
    }

    pub fn series(&self, v: VariantId) -> Option<&[DayRow]> {
        self.variant_index(v).map(|i| self.values[i].as_slice())
    }

    pub fn get(&self, v: VariantId, day: usize) -> Option<&DayRow> {
        Some(&self.values[self.variant_index(v)?][self.day_index(day)?])
    }

    pub fn set(&mut self, v: VariantId, day: usize, row: DayRow) -> Result<()> {
        let vi = self
            .variant_index(v)
            .ok_or_else(|| Error::Shape(format!("variant {v} not in matrix")))?;
        let di = self
            .day_index(day)
            .ok_or_else(|| Error::Shape(format!("day {day} not in matrix")))?;
        self.values[vi][di] = row;
        Ok(())
    }

    /// True when the cell holds a finite forecast.
    pub fn is_filled(&self, v: VariantId, day: usize) -> bool {
        self.get(v, day).is_some_and(|r| r.iter().all(|x| x.is_finite()))
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.variants.len(), self.days.len(), HOURS)
    }
}

#[derive(Debug, Clone)]
pub struct BacktestOutput {
    pub matrix: ForecastMatrix,
    pub failures: Vec<Failure>,
}

/// Runs the pipeline with pluggable predict and LTSC stages.
pub struct Backtester<'a> {
    pub config: BacktestConfig,
    predictor: &'a dyn Predictor,
    ltsc: &'a dyn LtscForecaster,
}

static DEFAULT_LTSC: Smoothing = Smoothing;

impl<'a> Backtester<'a> {
    pub fn new(config: BacktestConfig, predictor: &'a dyn Predictor) -> Self {
        Self {
            config,
            predictor,
            ltsc: &DEFAULT_LTSC,
        }
    }

    pub fn with_ltsc(mut self, ltsc: &'a dyn LtscForecaster) -> Self {
        self.ltsc = ltsc;
        self
    }

    pub fn window_for(&self, target_day: usize) -> Result<CalibrationWindow> {
        CalibrationWindow::ending_before(target_day, self.config.calibration_days)
    }

    /// VST, predict and inverse VST of one price component over the window.
    fn forecast_component(&self, ctx: &DayContext, class: ModelClass, stage: Stage, series: &[f64]) -> Result<DayRow> {
        let norm = Normalizer::fit(series)?;
        let transformed = norm.transform_all(series)?;
        let y: Vec<DayRow> = transformed
            .chunks_exact(HOURS)
            .map(|c| {
                let mut r = [0.0; HOURS];
                r.copy_from_slice(c);
                r
            })
            .collect();
        let data = ModelData {
            y: &y,
            x1: &ctx.x1,
            x2: &ctx.x2,
            weekdays: &ctx.weekdays,
        };
        let yhat = self.predictor.predict(class, stage, &data)?;
        let mut out = [0.0; HOURS];
        for (o, v) in out.iter_mut().zip(yhat) {
            *o = norm.inverse(v)?;
        }
        Ok(out)
    }

    /// Forecast without seasonal decomposition.
    pub fn forecast_base(&self, ctx: &DayContext, class: ModelClass) -> Result<DayRow> {
        self.forecast_component(ctx, class, Stage::Base, &ctx.prices)
    }

    fn forecast_with_ltsc(
        &self,
        ctx: &DayContext,
        class: ModelClass,
        stage: Stage,
        ltsc: &LtscForecast,
    ) -> Result<DayRow> {
        let y: Vec<f64> = ctx.prices.iter().zip(&ltsc.in_window).map(|(p, t)| p - t).collect();
        let yhat = self.forecast_component(ctx, class, stage, &y)?;
        let mut out = [0.0; HOURS];
        for h in 0..HOURS {
            out[h] = yhat[h] + ltsc.target[h];
        }
        Ok(out)
    }

    /// One individual seasonal-component forecast. The extrapolated mode
    /// needs the base forecast of the same model class.
    pub fn forecast_sc_single(
        &self,
        ctx: &DayContext,
        class: ModelClass,
        spec: LtscSpec,
        mode: Decomposition,
        base_forecast: Option<&DayRow>,
    ) -> Result<DayRow> {
        let ltsc = match (mode, base_forecast) {
            (Decomposition::Naive, _) => self.ltsc.naive(&ctx.prices, spec)?,
            (Decomposition::Extrapolated, Some(base)) => self.ltsc.extrapolated(&ctx.prices, base, spec)?,
            (Decomposition::Extrapolated, None) => {
                return Err(Error::Config("extrapolated LTSC needs the base forecast".into()))
            }
            (Decomposition::None, _) => return Err(Error::Config("no decomposition requested".into())),
        };
        self.forecast_with_ltsc(
            ctx,
            class,
            Stage::Component {
                spec,
                decomposition: mode,
            },
            &ltsc,
        )
    }

    /// Every configured variant for one target day.
    pub fn forecast_day(&self, panel: &HourlyPanel, target_day: usize) -> DayForecasts {
        let variants = self.config.variants();
        let ctx = match self.window_for(target_day).and_then(|w| DayContext::new(panel, w)) {
            Ok(c) => c,
            Err(e) => {
                let msg = e.to_string();
                return DayForecasts {
                    day: target_day,
                    values: variants.into_iter().map(|v| (v, Err(msg.clone()))).collect(),
                };
            }
        };
        let specs = self.config.active_specs();
        let classes = &self.config.classes;
        let want = |d: Decomposition| self.config.decompositions.contains(&d);
        let need_base = want(Decomposition::None) || want(Decomposition::Extrapolated);

        type Res = std::result::Result<DayRow, String>;
        let (bases, naive_ltsc): (Vec<Option<Res>>, Vec<std::result::Result<LtscForecast, String>>) = rayon::join(
            || {
                classes
                    .par_iter()
                    .map(|&c| need_base.then(|| self.forecast_base(&ctx, c).map_err(|e| e.to_string())))
                    .collect()
            },
            || {
                if want(Decomposition::Naive) {
                    specs
                        .par_iter()
                        .map(|&s| self.ltsc.naive(&ctx.prices, s).map_err(|e| e.to_string()))
                        .collect()
                } else {
                    Vec::new()
                }
            },
        );

        let mut jobs = Vec::new();
        for (ci, &class) in classes.iter().enumerate() {
            for &mode in &[Decomposition::Naive, Decomposition::Extrapolated] {
                if want(mode) {
                    for (si, &spec) in specs.iter().enumerate() {
                        jobs.push((ci, class, mode, si, spec));
                    }
                }
            }
        }
        let singles: Vec<Res> = jobs
            .par_iter()
            .map(|&(ci, class, mode, si, spec)| {
                let stage = Stage::Component {
                    spec,
                    decomposition: mode,
                };
                let ltsc = match mode {
                    Decomposition::Naive => naive_ltsc[si].clone()?,
                    _ => {
                        let base = match &bases[ci] {
                            Some(Ok(b)) => b,
                            Some(Err(e)) => return Err(format!("base forecast failed: {e}")),
                            None => unreachable!("base computed whenever eSC is requested"),
                        };
                        self.ltsc.extrapolated(&ctx.prices, base, spec).map_err(|e| e.to_string())?
                    }
                };
                self.forecast_with_ltsc(&ctx, class, stage, &ltsc)
                    .map_err(|e| format!("{spec}: {e}"))
            })
            .collect();

        let mut values = Vec::with_capacity(variants.len());
        for v in variants {
            let ci = classes.iter().position(|c| *c == v.class).expect("configured class");
            let res = match v.pool {
                None => bases[ci].clone().expect("base computed when requested"),
                Some(pool) => {
                    let members: Vec<&Res> = jobs
                        .iter()
                        .zip(&singles)
                        .filter(|((c, _, m, _, s), _)| *c == ci && *m == v.decomposition && pool.contains(s))
                        .map(|(_, r)| r)
                        .collect();
                    match members.iter().find_map(|r| r.as_ref().err()) {
                        Some(e) => Err(e.clone()),
                        None => {
                            let rows: Vec<DayRow> = members.iter().map(|r| *r.as_ref().expect("checked")).collect();
                            combine(&rows).map_err(|e| e.to_string())
                        }
                    }
                }
            };
            values.push((v, res));
        }
        DayForecasts { day: target_day, values }
    }

    /// Forecasts every day in `days`, in parallel on the current rayon pool.
    /// `on_day` sees each day's results as they complete, in no fixed order;
    /// the returned matrix does not depend on scheduling.
    pub fn run<F>(&self, panel: &HourlyPanel, days: &[usize], on_day: F) -> Result<BacktestOutput>
    where
        F: Fn(&DayForecasts) + Sync,
    {
        self.config.validate()?;
        let mut sorted = days.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if let Some(&d) = sorted.first() {
            self.window_for(d)?;
        }
        if let Some(&d) = sorted.last() {
            if d >= panel.days() {
                return Err(Error::Config(format!("test day {d} beyond panel of {} days", panel.days())));
            }
        }
        let results: Vec<DayForecasts> = sorted
            .par_iter()
            .map(|&d| {
                let f = self.forecast_day(panel, d);
                on_day(&f);
                f
            })
            .collect();
        let mut matrix = ForecastMatrix::new(self.config.variants(), sorted);
        let mut failures = Vec::new();
        for day in results {
            for (v, res) in day.values {
                match res {
                    Ok(row) => matrix.set(v, day.day, row)?,
                    Err(message) => failures.push(Failure {
                        day: day.day,
                        variant: v,
                        message,
                    }),
                }
            }
        }
        Ok(BacktestOutput { matrix, failures })
    }
}

/// Backtest over `test_start..=test_end` with the regression predictor.
pub fn run_backtest(panel: &HourlyPanel, config: BacktestConfig, test_start: usize, test_end: usize) -> Result<BacktestOutput> {
    let windows = crate::timeseries::rolling_windows(panel.days(), config.calibration_days, test_start, test_end)?;
    let days: Vec<usize> = windows.iter().map(|w| w.target_day()).collect();
    let predictor = RegressionPredictor { lasso: config.lasso };
    Backtester::new(config, &predictor).run(panel, &days, |_| {})
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_names_round_trip() {
        let all = VariantId::all();
        assert_eq!(all.len(), 14);
        let names: Vec<String> = all.iter().map(|v| v.to_string()).collect();
        assert_eq!(names[0], "ARX");
        assert_eq!(names[1], "SCARX-MA");
        assert_eq!(names[6], "eSCARX-MAS");
        assert_eq!(names[13], "eSCLEAR-MAS");
        for v in all {
            assert_eq!(v.to_string().parse::<VariantId>().unwrap(), v);
        }
        assert!("SCARX".parse::<VariantId>().is_err());
        assert!("ARX-MA".parse::<VariantId>().is_err());
        assert!("ESCARX-MA".parse::<VariantId>().is_err());
    }

    #[test]
    fn naive_counterpart_pairs() {
        let e: VariantId = "eSCLEAR-S".parse().unwrap();
        assert_eq!(e.naive_counterpart().unwrap().to_string(), "SCLEAR-S");
        assert!(VariantId::base(ModelClass::Arx).naive_counterpart().is_none());
    }

    #[test]
    fn combine_rules() {
        let v: DayRow = std::array::from_fn(|h| h as f64 * 1.5 - 4.0);
        assert_eq!(combine(&[v]).unwrap(), v);
        let neg: DayRow = std::array::from_fn(|h| -v[h]);
        assert_eq!(combine(&[v, neg]).unwrap(), [0.0; HOURS]);
        assert!(matches!(combine(&[]), Err(Error::Empty(_))));
    }

    #[test]
    fn mas_is_mean_of_pool_means() {
        let rows: Vec<DayRow> = (0..10).map(|k| std::array::from_fn(|h| (k * 31 + h * 7) as f64 % 13.0 - 2.5)).collect();
        let ma = combine(&rows[..5]).unwrap();
        let s = combine(&rows[5..]).unwrap();
        let mas = combine(&rows).unwrap();
        for h in 0..HOURS {
            assert!((mas[h] - (5.0 * ma[h] + 5.0 * s[h]) / 10.0).abs() < 1e-12);
        }
    }

    #[test]
    fn config_validation() {
        let mut c = BacktestConfig::default();
        assert!(c.validate().is_ok());
        c.pools = vec![Pool::S];
        c.specs = vec![LtscSpec::MovingAverage { days: 1 }];
        assert!(c.validate().is_err());
        let mut c = BacktestConfig {
            calibration_days: 60,
            ..Default::default()
        };
        // 60 days = 1440 hours, too short for MA91 and S11.
        assert!(c.validate().is_err());
        c.specs = vec![LtscSpec::MovingAverage { days: 28 }, LtscSpec::Wavelet { level: 9 }];
        assert!(c.validate().is_ok());
        assert_eq!(c.active_specs().len(), 2);
        c.decompositions = vec![Decomposition::None];
        assert!(c.active_specs().is_empty());
        assert_eq!(c.variants().len(), 2);
    }
}
