//! CSV reports: forecasts, error metrics, DM p-values, rolling rMAE and
//! trading profits.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::eval::{self, DmMatrix, Metric};
use crate::pipeline::{DayForecasts, Failure, ForecastMatrix, ModelClass, VariantId};
use crate::timeseries::{DayRow, HourlyPanel, HOURS};
use crate::trading::{self, BatterySpec};

pub const FORECASTS_FILE: &str = "forecasts.csv";
pub const METRICS_FILE: &str = "metrics.csv";
pub const DM_FILE: &str = "dm_pvalues.csv";
pub const RMAE_FILE: &str = "rmae.csv";
pub const PROFITS_FILE: &str = "profits.csv";
pub const FAILURES_FILE: &str = "failures.csv";

const FORECAST_HEADER: [&str; 4] = ["date", "hour", "variant", "forecast"];
const DATE_FORMAT: &str = "%Y-%m-%d";

fn fmt_date(d: NaiveDate) -> String {
    d.format(DATE_FORMAT).to_string()
}

fn parse_date(s: &str, line: u64) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), DATE_FORMAT).map_err(|e| Error::Parse {
        line,
        message: format!("bad date `{s}`: {e}"),
    })
}

/// Writes to `path` through a temporary sibling, so readers never see a
/// half-written file.
fn write_atomically(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let tmp = path.with_extension("csv.tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        body(&mut w)?;
        w.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn num(v: f64) -> String {
    v.to_string()
}

/// Forecast cells found in a forecasts file; only days with 24 finite
/// values count.
pub type StoredForecasts = BTreeMap<(usize, VariantId), DayRow>;

pub fn read_forecasts(path: &Path, panel: &HourlyPanel) -> Result<StoredForecasts> {
    let mut rdr = csv::Reader::from_path(path)?;
    let headers = rdr.headers()?.clone();
    if headers.iter().map(str::trim).ne(FORECAST_HEADER) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header {}", FORECAST_HEADER.join(",")),
        });
    }
    let mut partial: BTreeMap<(usize, VariantId), (DayRow, u32)> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |message: String| Error::Parse { line, message };
        if rec.len() != 4 {
            return Err(bad(format!("expected 4 fields, got {}", rec.len())));
        }
        let date = parse_date(&rec[0], line)?;
        let day = panel
            .day_of(date)
            .ok_or_else(|| bad(format!("date {date} outside the data")))?;
        let hour: usize = rec[1].trim().parse().map_err(|_| bad(format!("bad hour `{}`", &rec[1])))?;
        if !(1..=HOURS).contains(&hour) {
            return Err(bad(format!("hour {hour} not in 1..=24")));
        }
        let variant: VariantId = rec[2].parse().map_err(|e: Error| bad(e.to_string()))?;
        let value: f64 = rec[3].trim().parse().map_err(|_| bad(format!("bad forecast `{}`", &rec[3])))?;
        let cell = partial.entry((day, variant)).or_insert(([f64::NAN; HOURS], 0));
        cell.0[hour - 1] = value;
        cell.1 |= 1 << (hour - 1);
    }
    Ok(partial
        .into_iter()
        .filter(|(_, (row, mask))| *mask == (1 << HOURS) - 1 && row.iter().all(|v| v.is_finite()))
        .map(|(k, (row, _))| (k, row))
        .collect())
}

/// Assembles stored cells into a matrix over the days and variants present.
pub fn matrix_from_stored(stored: &StoredForecasts) -> Result<ForecastMatrix> {
    if stored.is_empty() {
        return Err(Error::Empty("forecast file has no complete days"));
    }
    let mut days: Vec<usize> = stored.keys().map(|k| k.0).collect();
    days.sort_unstable();
    days.dedup();
    let mut variants: Vec<VariantId> = stored.keys().map(|k| k.1).collect();
    variants.sort_unstable();
    variants.dedup();
    let mut m = ForecastMatrix::new(variants, days);
    for (&(day, v), row) in stored {
        m.set(v, day, *row)?;
    }
    Ok(m)
}

fn write_forecast_rows<W: Write>(
    w: &mut csv::Writer<W>,
    panel: &HourlyPanel,
    day: usize,
    variant: VariantId,
    row: &DayRow,
) -> Result<()> {
    let date = fmt_date(panel.date(day));
    let name = variant.to_string();
    for (h, v) in row.iter().enumerate() {
        w.write_record([date.as_str(), &(h + 1).to_string(), &name, &num(*v)])?;
    }
    Ok(())
}

/// Appends each finished day to the forecasts file, so an interrupted run
/// can resume. Failed cells are written as NaN.
pub struct ForecastLog {
    writer: Mutex<csv::Writer<File>>,
}

impl ForecastLog {
    pub fn open(path: &Path) -> Result<Self> {
        let fresh = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        let mut writer = csv::Writer::from_writer(file);
        if fresh {
            writer.write_record(FORECAST_HEADER)?;
            writer.flush()?;
        }
        Ok(Self {
            writer: Mutex::new(writer),
        })
    }

    pub fn record(&self, panel: &HourlyPanel, day: &DayForecasts) -> Result<()> {
        let mut w = self.writer.lock().expect("forecast log poisoned");
        for (v, res) in &day.values {
            let row = res.as_ref().copied().unwrap_or([f64::NAN; HOURS]);
            write_forecast_rows(&mut w, panel, day.day, *v, &row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Rewrites the forecasts file in canonical order: date, variant, hour.
pub fn write_forecasts(path: &Path, panel: &HourlyPanel, matrix: &ForecastMatrix) -> Result<()> {
    write_atomically(path, |out| {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(FORECAST_HEADER)?;
        for &day in matrix.days() {
            for &v in matrix.variants() {
                let row = matrix.get(v, day).expect("cell in matrix");
                write_forecast_rows(&mut w, panel, day, v, row)?;
            }
        }
        w.flush()?;
        Ok(())
    })
}

pub fn write_failures(path: &Path, panel: &HourlyPanel, failures: &[Failure]) -> Result<()> {
    let mut sorted: Vec<&Failure> = failures.iter().collect();
    sorted.sort_by_key(|f| (f.day, f.variant));
    write_atomically(path, |out| {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["date", "variant", "message"])?;
        for f in sorted {
            w.write_record([fmt_date(panel.date(f.day)), f.variant.to_string(), f.message.clone()])?;
        }
        w.flush()?;
        Ok(())
    })
}

pub fn read_failures(path: &Path, panel: &HourlyPanel) -> Result<Vec<Failure>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |message: String| Error::Parse { line, message };
        if rec.len() != 3 {
            return Err(bad(format!("expected 3 fields, got {}", rec.len())));
        }
        let date = parse_date(&rec[0], line)?;
        out.push(Failure {
            day: panel.day_of(date).ok_or_else(|| bad(format!("date {date} outside the data")))?,
            variant: rec[1].parse().map_err(|e: Error| bad(e.to_string()))?,
            message: rec[2].to_string(),
        });
    }
    Ok(out)
}

/// Actual prices on the matrix's days.
pub fn actual_rows(panel: &HourlyPanel, matrix: &ForecastMatrix) -> Vec<DayRow> {
    matrix.days().iter().map(|&d| panel.price()[d]).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub variant: VariantId,
    pub mae: Option<Metric>,
    pub rmse: Option<Metric>,
    /// Change relative to the naive-LTSC counterpart, in percent.
    pub mae_change_pct: Option<f64>,
    pub rmse_change_pct: Option<f64>,
}

pub fn compute_metrics(actual: &[DayRow], matrix: &ForecastMatrix) -> Vec<MetricsRow> {
    let mut rows: Vec<MetricsRow> = matrix
        .variants()
        .iter()
        .map(|&v| {
            let f = matrix.series(v).expect("variant in matrix");
            MetricsRow {
                variant: v,
                mae: eval::mae(actual, f).ok(),
                rmse: eval::rmse(actual, f).ok(),
                mae_change_pct: None,
                rmse_change_pct: None,
            }
        })
        .collect();
    let lookup: BTreeMap<VariantId, (Option<Metric>, Option<Metric>)> =
        rows.iter().map(|r| (r.variant, (r.mae, r.rmse))).collect();
    let pct = |new: Option<Metric>, old: Option<Metric>| match (new, old) {
        (Some(n), Some(o)) if o.value != 0.0 => Some(100.0 * (n.value - o.value) / o.value),
        _ => None,
    };
    for r in &mut rows {
        if let Some((mae, rmse)) = r.variant.naive_counterpart().and_then(|c| lookup.get(&c)) {
            r.mae_change_pct = pct(r.mae, *mae);
            r.rmse_change_pct = pct(r.rmse, *rmse);
        }
    }
    rows
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn write_metrics(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    write_atomically(path, |out| {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "variant",
            "mae",
            "rmse",
            "mae_change_pct",
            "rmse_change_pct",
            "days_used",
            "days_excluded",
        ])?;
        for r in rows {
            let used = r.mae.map(|m| m.days_used.to_string()).unwrap_or_else(|| "0".into());
            let excluded = r.mae.map(|m| m.days_excluded.to_string()).unwrap_or_default();
            w.write_record([
                r.variant.to_string(),
                opt(r.mae.map(|m| m.value)),
                opt(r.rmse.map(|m| m.value)),
                opt(r.mae_change_pct),
                opt(r.rmse_change_pct),
                used,
                excluded,
            ])?;
        }
        w.flush()?;
        Ok(())
    })
}

/// Daily errors of every variant in matrix order.
pub fn error_series(actual: &[DayRow], matrix: &ForecastMatrix) -> Result<Vec<Vec<DayRow>>> {
    matrix
        .variants()
        .iter()
        .map(|&v| eval::daily_errors(actual, matrix.series(v).expect("variant in matrix")))
        .collect()
}

pub fn dm_for_matrix(actual: &[DayRow], matrix: &ForecastMatrix) -> Result<DmMatrix> {
    let errors = error_series(actual, matrix)?;
    let refs: Vec<&[DayRow]> = errors.iter().map(Vec::as_slice).collect();
    eval::dm_matrix(&refs)
}

/// Small `p_value_col_better` means the column variant is significantly
/// more accurate than the row variant.
pub fn write_dm(path: &Path, variants: &[VariantId], dm: &DmMatrix) -> Result<()> {
    write_atomically(path, |out| {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["row_variant", "col_variant", "p_value_col_better", "statistic", "n_days"])?;
        for (i, a) in variants.iter().enumerate() {
            for (j, b) in variants.iter().enumerate() {
                if i == j {
                    continue;
                }
                let (p, s, n) = match dm.cell(i, j) {
                    Some(Ok(r)) => (num(r.p_value), num(r.statistic), r.n_days.to_string()),
                    _ => ("NaN".into(), "NaN".into(), String::new()),
                };
                w.write_record([a.to_string(), b.to_string(), p, s, n])?;
            }
        }
        w.flush()?;
        Ok(())
    })
}

/// Rolling rMAE against the ARX benchmark. Each value is dated by the last
/// day of its window. Returns false, writing nothing, when there is no ARX
/// series or too few days.
pub fn write_rmae(path: &Path, panel: &HourlyPanel, matrix: &ForecastMatrix, window: usize) -> Result<bool> {
    let bench = VariantId::base(ModelClass::Arx);
    let Some(bench_series) = matrix.series(bench) else {
        return Ok(false);
    };
    if matrix.days().len() < window {
        return Ok(false);
    }
    let actual = actual_rows(panel, matrix);
    let bench_err = eval::daily_errors(&actual, bench_series)?;
    let mut series = Vec::new();
    for &v in matrix.variants() {
        let err = eval::daily_errors(&actual, matrix.series(v).expect("variant in matrix"))?;
        series.push((v, eval::rmae_rolling(&err, &bench_err, window)?));
    }
    write_atomically(path, |out| {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["date", "variant", "rMAE"])?;
        for i in 0..=matrix.days().len() - window {
            let date = fmt_date(panel.date(matrix.days()[i + window - 1]));
            for (v, r) in &series {
                w.write_record([date.clone(), v.to_string(), num(r[i])])?;
            }
        }
        w.flush()?;
        Ok(())
    })?;
    Ok(true)
}

/// Per-day trades and a `TOTAL` row per variant with the fraction of the
/// crystal-ball profit. Hours are 1-based; empty when no trade was made.
pub fn write_profits(path: &Path, panel: &HourlyPanel, matrix: &ForecastMatrix, spec: &BatterySpec) -> Result<()> {
    let actual = actual_rows(panel, matrix);
    let mut summaries = Vec::new();
    for &v in matrix.variants() {
        let s = trading::aggregate_profits(&actual, matrix.series(v).expect("variant in matrix"), spec)?;
        summaries.push((v, s));
    }
    write_atomically(path, |out| {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["date", "variant", "h1_hat", "h2_hat", "profit", "cb_profit", "fraction"])?;
        for (v, s) in &summaries {
            for d in &s.days {
                let (h1, h2) = if d.model.traded {
                    ((d.model.h1 + 1).to_string(), (d.model.h2 + 1).to_string())
                } else {
                    (String::new(), String::new())
                };
                w.write_record([
                    fmt_date(panel.date(matrix.days()[d.index])),
                    v.to_string(),
                    h1,
                    h2,
                    num(d.model.profit),
                    num(d.crystal_ball.profit),
                    String::new(),
                ])?;
            }
        }
        for (v, s) in &summaries {
            w.write_record([
                "TOTAL".to_string(),
                v.to_string(),
                String::new(),
                String::new(),
                num(s.total),
                num(s.crystal_ball_total),
                num(s.fraction),
            ])?;
        }
        w.flush()?;
        Ok(())
    })
}

/// Files written by [`write_all`].
#[derive(Debug, Clone, Default)]
pub struct Written {
    pub files: Vec<PathBuf>,
    pub notes: Vec<String>,
}

/// Metrics, DM, rMAE and profit reports for a filled matrix.
pub fn write_all(
    dir: &Path,
    panel: &HourlyPanel,
    matrix: &ForecastMatrix,
    spec: &BatterySpec,
    rmae_window: usize,
) -> Result<Written> {
    let mut out = Written::default();
    let actual = actual_rows(panel, matrix);

    let metrics = dir.join(METRICS_FILE);
    write_metrics(&metrics, &compute_metrics(&actual, matrix))?;
    out.files.push(metrics);

    if matrix.variants().len() >= 2 {
        let dm = dir.join(DM_FILE);
        write_dm(&dm, matrix.variants(), &dm_for_matrix(&actual, matrix)?)?;
        out.files.push(dm);
    } else {
        out.notes.push("DM test skipped: fewer than two variants".into());
    }

    let rmae = dir.join(RMAE_FILE);
    if write_rmae(&rmae, panel, matrix, rmae_window)? {
        out.files.push(rmae);
    } else {
        out.notes.push(format!(
            "rMAE skipped: needs the ARX series and at least {rmae_window} test days"
        ));
    }

    let profits = dir.join(PROFITS_FILE);
    match write_profits(&profits, panel, matrix, spec) {
        Ok(()) => out.files.push(profits),
        Err(e @ Error::NonPositiveCrystalBall(_)) => out.notes.push(format!("profits skipped: {e}")),
        Err(e) => return Err(e),
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn panel(days: usize) -> HourlyPanel {
        let rows = |k: f64| (0..days).map(|d| std::array::from_fn(|h| k + (d * 3 + h) as f64)).collect();
        HourlyPanel::new(NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(), rows(10.0), rows(1.0), rows(2.0)).unwrap()
    }

    #[test]
    fn forecasts_round_trip() {
        let p = panel(5);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(FORECASTS_FILE);
        let vs = vec![VariantId::base(ModelClass::Arx), "eSCLEAR-MAS".parse().unwrap()];
        let mut m = ForecastMatrix::new(vs.clone(), vec![2, 3]);
        m.set(vs[0], 2, std::array::from_fn(|h| h as f64 / 3.0)).unwrap();
        m.set(vs[1], 2, [1e-300; HOURS]).unwrap();
        m.set(vs[0], 3, [-7.25; HOURS]).unwrap();
        write_forecasts(&path, &p, &m).unwrap();
        let stored = read_forecasts(&path, &p).unwrap();
        // Day 3 of the second variant is NaN and therefore missing.
        assert_eq!(stored.len(), 3);
        assert_eq!(stored[&(2, vs[0])], *m.get(vs[0], 2).unwrap());
        assert_eq!(stored[&(2, vs[1])], [1e-300; HOURS]);
        let back = matrix_from_stored(&stored).unwrap();
        assert_eq!(back.variants(), &vs[..]);
        assert!(!back.is_filled(vs[1], 3));
    }

    #[test]
    fn log_appends_and_reads_back() {
        let p = panel(4);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(FORECASTS_FILE);
        let v = VariantId::base(ModelClass::Lear);
        for day in [1, 3] {
            let log = ForecastLog::open(&path).unwrap();
            log.record(
                &p,
                &DayForecasts {
                    day,
                    values: vec![(v, Ok([day as f64; HOURS]))],
                },
            )
            .unwrap();
        }
        let stored = read_forecasts(&path, &p).unwrap();
        assert_eq!(stored.len(), 2);
        assert_eq!(stored[&(3, v)], [3.0; HOURS]);
    }

    #[test]
    fn bad_forecast_file_reports_line() {
        let p = panel(2);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(FORECASTS_FILE);
        fs::write(&path, "date,hour,variant,forecast\n2020-01-01,1,ARX,1.0\n2020-01-01,25,ARX,1.0\n").unwrap();
        match read_forecasts(&path, &p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn metrics_change_against_naive_counterpart() {
        let p = panel(3);
        let vs: Vec<VariantId> = ["SCARX-MA", "eSCARX-MA"].iter().map(|s| s.parse().unwrap()).collect();
        let mut m = ForecastMatrix::new(vs.clone(), vec![0, 1, 2]);
        for d in 0..3 {
            let actual = p.price()[d];
            m.set(vs[0], d, actual.map(|x| x + 4.0)).unwrap();
            m.set(vs[1], d, actual.map(|x| x - 3.0)).unwrap();
        }
        let rows = compute_metrics(&actual_rows(&p, &m), &m);
        assert_eq!(rows[0].mae.unwrap().value, 4.0);
        assert!(rows[0].mae_change_pct.is_none());
        assert_eq!(rows[1].mae_change_pct, Some(-25.0));
        assert_eq!(rows[1].rmse_change_pct, Some(-25.0));
    }
}
