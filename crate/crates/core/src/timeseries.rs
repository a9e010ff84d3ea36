//! Hourly data model, CSV ingestion with daylight-saving repair, and rolling
//! calibration windows.
//!
//! Days are indexed from 0 internally; hour `h` of a [`DayRow`] covers
//! `h:00` to `h+1:00` local time.

use std::collections::HashMap;
use std::io::{Read, Write};

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Timelike};

use crate::error::{Error, Result};

pub const HOURS: usize = 24;
pub type DayRow = [f64; HOURS];

pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%d %H:%M";
pub const CSV_HEADER: [&str; 4] = ["timestamp", "price", "load_da", "res_da"];

/// Aligned hourly grid of prices and the two day-ahead exogenous forecasts
/// (system load and renewable generation).
#[derive(Debug, Clone, PartialEq)]
pub struct HourlyPanel {
    start_date: NaiveDate,
    /// ISO weekday of day 0, 1 = Monday .. 7 = Sunday.
    start_weekday: u8,
    price: Vec<DayRow>,
    load_da: Vec<DayRow>,
    res_da: Vec<DayRow>,
}

impl HourlyPanel {
    pub fn new(
        start_date: NaiveDate,
        price: Vec<DayRow>,
        load_da: Vec<DayRow>,
        res_da: Vec<DayRow>,
    ) -> Result<Self> {
        if price.is_empty() {
            return Err(Error::Empty("panel has no days"));
        }
        if price.len() != load_da.len() || price.len() != res_da.len() {
            return Err(Error::Shape(format!(
                "series lengths differ: price {}, load {}, res {}",
                price.len(),
                load_da.len(),
                res_da.len()
            )));
        }
        for (name, series) in [("price", &price), ("load_da", &load_da), ("res_da", &res_da)] {
            if let Some(d) = series.iter().position(|row| row.iter().any(|v| !v.is_finite())) {
                return Err(Error::Ingest(format!("non-finite {name} value on day {d}")));
            }
        }
        let start_weekday = start_date.weekday().number_from_monday() as u8;
        Ok(Self {
            start_date,
            start_weekday,
            price,
            load_da,
            res_da,
        })
    }

    /// Overrides the weekday of day 0 (1 = Monday .. 7 = Sunday). By default
    /// it is derived from the start date.
    pub fn with_start_weekday(mut self, weekday: u8) -> Result<Self> {
        if !(1..=7).contains(&weekday) {
            return Err(Error::Config(format!("start weekday {weekday} not in 1..=7")));
        }
        self.start_weekday = weekday;
        Ok(self)
    }

    pub fn days(&self) -> usize {
        self.price.len()
    }

    pub fn start_date(&self) -> NaiveDate {
        self.start_date
    }

    pub fn date(&self, day: usize) -> NaiveDate {
        self.start_date + Duration::days(day as i64)
    }

    /// Day index of `date`, if it lies inside the panel.
    pub fn day_of(&self, date: NaiveDate) -> Option<usize> {
        let offset = (date - self.start_date).num_days();
        (offset >= 0 && (offset as usize) < self.days()).then_some(offset as usize)
    }

    pub fn price(&self) -> &[DayRow] {
        &self.price
    }

    pub fn load_da(&self) -> &[DayRow] {
        &self.load_da
    }

    pub fn res_da(&self) -> &[DayRow] {
        &self.res_da
    }

    /// ISO weekday 1..=7 of `day`.
    pub fn weekday(&self, day: usize) -> u8 {
        ((self.start_weekday as usize - 1 + day) % 7 + 1) as u8
    }

    /// Returns the panel with every value of every series after `day`
    /// shifted by `delta`. Used to probe for look-ahead.
    pub fn perturbed_after(&self, day: usize, delta: f64) -> Self {
        let mut out = self.clone();
        for series in [&mut out.price, &mut out.load_da, &mut out.res_da] {
            for row in series.iter_mut().skip(day + 1) {
                for v in row.iter_mut() {
                    *v += delta;
                }
            }
        }
        out
    }

    /// Writes the panel in the ingestion CSV format. Values use the shortest
    /// representation that parses back to the identical `f64`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(CSV_HEADER)?;
        for d in 0..self.days() {
            let date = self.date(d);
            for h in 0..HOURS {
                let ts = date.and_hms_opt(h as u32, 0, 0).expect("valid hour");
                w.write_record([
                    ts.format(TIMESTAMP_FORMAT).to_string(),
                    self.price[d][h].to_string(),
                    self.load_da[d][h].to_string(),
                    self.res_da[d][h].to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Weekday dummies `D1..D7` for an ISO weekday.
pub fn weekday_dummies(weekday: u8) -> [f64; 7] {
    let mut d = [0.0; 7];
    d[(weekday as usize - 1) % 7] = 1.0;
    d
}

/// One parsed CSV line.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    pub line: u64,
    pub timestamp: NaiveDateTime,
    pub price: f64,
    pub load_da: f64,
    pub res_da: f64,
}

impl RawRecord {
    fn values(&self) -> [f64; 3] {
        [self.price, self.load_da, self.res_da]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RepairKind {
    /// Spring transition: hour absent, filled with the mean of its neighbors.
    FilledMissing,
    /// Autumn transition: hour present twice, replaced by the mean.
    MergedDuplicate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Repair {
    pub kind: RepairKind,
    pub timestamp: NaiveDateTime,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub records: usize,
    pub repairs: Vec<Repair>,
}

/// Reads raw records from a CSV with header `timestamp,price,load_da,res_da`.
/// Column order is free; extra columns are ignored.
pub fn read_records<R: Read>(reader: R) -> Result<Vec<RawRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut idx = [0usize; 4];
    for (slot, name) in idx.iter_mut().zip(CSV_HEADER) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))?;
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize| rec.get(idx[i]).unwrap_or("");
        let timestamp = NaiveDateTime::parse_from_str(field(0), TIMESTAMP_FORMAT).map_err(|e| {
            Error::Parse {
                line,
                message: format!("bad timestamp `{}`: {e}", field(0)),
            }
        })?;
        let num = |i: usize| -> Result<f64> {
            let raw = field(i);
            match raw.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Parse {
                    line,
                    message: format!("column `{}`: `{raw}` is not a finite number", CSV_HEADER[i]),
                }),
            }
        };
        out.push(RawRecord {
            line,
            timestamp,
            price: num(1)?,
            load_da: num(2)?,
            res_da: num(3)?,
        });
    }
    Ok(out)
}

/// Builds a dense panel from timestamp-sorted hourly records, repairing
/// daylight-saving artifacts structurally: a single missing hour becomes the
/// mean of its two neighbors and a duplicated hour becomes the mean of the
/// duplicates. The same rules apply to all three series.
pub fn ingest(records: &[RawRecord]) -> Result<(HourlyPanel, IngestReport)> {
    let first = records.first().ok_or(Error::Empty("no records"))?;
    if first.timestamp.hour() != 0 || first.timestamp.minute() != 0 {
        return Err(Error::Ingest(format!(
            "series must start at 00:00, first record is {}",
            first.timestamp
        )));
    }
    let mut slots: Vec<[f64; 3]> = Vec::with_capacity(records.len() + 2);
    let mut report = IngestReport {
        records: records.len(),
        repairs: Vec::new(),
    };
    let mut per_day: HashMap<(NaiveDate, RepairKind), usize> = HashMap::new();
    let mut last_merged = false;
    slots.push(first.values());

    for pair in records.windows(2) {
        let (prev, cur) = (&pair[0], &pair[1]);
        if cur.timestamp.minute() != 0 {
            return Err(Error::Parse {
                line: cur.line,
                message: format!("timestamp {} is not on the hour", cur.timestamp),
            });
        }
        let step = (cur.timestamp - prev.timestamp).num_minutes();
        let repair = match step {
            60 => {
                slots.push(cur.values());
                last_merged = false;
                None
            }
            0 => {
                if last_merged {
                    return Err(Error::Ingest(format!(
                        "line {}: hour {} appears more than twice",
                        cur.line, cur.timestamp
                    )));
                }
                let last = slots.last_mut().expect("non-empty");
                let v = cur.values();
                for k in 0..3 {
                    last[k] = (last[k] + v[k]) / 2.0;
                }
                last_merged = true;
                Some(Repair {
                    kind: RepairKind::MergedDuplicate,
                    timestamp: cur.timestamp,
                })
            }
            120 => {
                let (a, b) = (prev.values(), cur.values());
                slots.push([(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0, (a[2] + b[2]) / 2.0]);
                slots.push(b);
                last_merged = false;
                Some(Repair {
                    kind: RepairKind::FilledMissing,
                    timestamp: prev.timestamp + Duration::hours(1),
                })
            }
            s if s < 0 => {
                return Err(Error::Ingest(format!(
                    "line {}: timestamp {} precedes {}; records must be sorted",
                    cur.line, cur.timestamp, prev.timestamp
                )))
            }
            s => {
                return Err(Error::Gap {
                    timestamp: cur.timestamp,
                    hours: s / 60,
                })
            }
        };
        if let Some(r) = repair {
            let n = per_day.entry((r.timestamp.date(), r.kind)).or_insert(0);
            *n += 1;
            if *n > 1 {
                return Err(Error::Ingest(format!(
                    "more than one {:?} repair on {}",
                    r.kind,
                    r.timestamp.date()
                )));
            }
            report.repairs.push(r);
        }
    }

    if slots.len() % HOURS != 0 {
        return Err(Error::Ingest(format!(
            "incomplete final day: {} hourly slots is not a multiple of 24 (last record {})",
            slots.len(),
            records.last().expect("non-empty").timestamp
        )));
    }
    let days = slots.len() / HOURS;
    let mut price = vec![[0.0; HOURS]; days];
    let mut load = vec![[0.0; HOURS]; days];
    let mut res = vec![[0.0; HOURS]; days];
    for (i, v) in slots.iter().enumerate() {
        let (d, h) = (i / HOURS, i % HOURS);
        price[d][h] = v[0];
        load[d][h] = v[1];
        res[d][h] = v[2];
    }
    let panel = HourlyPanel::new(first.timestamp.date(), price, load, res)?;
    Ok((panel, report))
}

/// Reads and ingests a CSV file in one step.
pub fn ingest_csv<R: Read>(reader: R) -> Result<(HourlyPanel, IngestReport)> {
    ingest(&read_records(reader)?)
}

/// A calibration window of consecutive days and the day it forecasts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CalibrationWindow {
    pub first_day: usize,
    pub last_day: usize,
}

impl CalibrationWindow {
    pub fn ending_before(target_day: usize, length_days: usize) -> Result<Self> {
        if length_days == 0 || target_day < length_days {
            return Err(Error::Config(format!(
                "target day {target_day} has fewer than {length_days} days of history"
            )));
        }
        Ok(Self {
            first_day: target_day - length_days,
            last_day: target_day - 1,
        })
    }

    pub fn length_days(&self) -> usize {
        self.last_day - self.first_day + 1
    }

    pub fn target_day(&self) -> usize {
        self.last_day + 1
    }

    pub fn days(&self) -> std::ops::RangeInclusive<usize> {
        self.first_day..=self.last_day
    }
}

/// One window per target day in `test_start..=test_end`, each shifted by
/// one day from the previous.
pub fn rolling_windows(
    panel_days: usize,
    length_days: usize,
    test_start: usize,
    test_end: usize,
) -> Result<Vec<CalibrationWindow>> {
    if test_start < length_days {
        return Err(Error::Config(format!(
            "test start day {test_start} leaves less than {length_days} days of calibration history"
        )));
    }
    if test_end < test_start {
        return Err(Error::Config(format!(
            "test end day {test_end} precedes test start day {test_start}"
        )));
    }
    if test_end >= panel_days {
        return Err(Error::Config(format!(
            "test end day {test_end} beyond panel of {panel_days} days"
        )));
    }
    (test_start..=test_end)
        .map(|t| CalibrationWindow::ending_before(t, length_days))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(s: &str) -> NaiveDateTime {
        NaiveDateTime::parse_from_str(s, TIMESTAMP_FORMAT).unwrap()
    }

    fn day_records(date: &str, hours: &[u32], price: impl Fn(u32) -> f64) -> Vec<RawRecord> {
        hours
            .iter()
            .enumerate()
            .map(|(i, &h)| RawRecord {
                line: i as u64 + 2,
                timestamp: ts(&format!("{date} {h:02}:00")),
                price: price(h),
                load_da: 1000.0 + h as f64,
                res_da: 200.0,
            })
            .collect()
    }

    #[test]
    fn spring_gap_filled_with_neighbor_mean() {
        let hours: Vec<u32> = (0..24).filter(|&h| h != 2).collect();
        let recs = day_records("2021-03-28", &hours, |h| if h == 1 { 40.0 } else if h == 3 { 60.0 } else { 10.0 });
        let (panel, report) = ingest(&recs).unwrap();
        assert_eq!(panel.days(), 1);
        assert_eq!(panel.price()[0][2], 50.0);
        assert_eq!(panel.load_da()[0][2], 1002.0);
        assert_eq!(report.repairs.len(), 1);
        assert_eq!(report.repairs[0].kind, RepairKind::FilledMissing);
        assert_eq!(report.repairs[0].timestamp, ts("2021-03-28 02:00"));
    }

    #[test]
    fn autumn_duplicate_averaged() {
        let mut hours: Vec<u32> = (0..24).collect();
        hours.insert(3, 2);
        let mut recs = day_records("2021-10-31", &hours, |_| 10.0);
        recs[2].price = 40.0;
        recs[3].price = 60.0;
        let (panel, report) = ingest(&recs).unwrap();
        assert_eq!(panel.price()[0][2], 50.0);
        assert_eq!(panel.price()[0][3], 10.0);
        assert_eq!(report.repairs[0].kind, RepairKind::MergedDuplicate);
    }

    #[test]
    fn complete_day_passes_through() {
        let hours: Vec<u32> = (0..24).collect();
        let recs = day_records("2021-06-01", &hours, |h| h as f64 * 1.5 - 3.0);
        let (panel, report) = ingest(&recs).unwrap();
        assert!(report.repairs.is_empty());
        for h in 0..24 {
            assert_eq!(panel.price()[0][h], h as f64 * 1.5 - 3.0);
        }
    }

    #[test]
    fn two_hour_gap_is_rejected_with_timestamp() {
        let hours: Vec<u32> = (0..24).filter(|&h| h != 5 && h != 6).collect();
        let recs = day_records("2021-06-01", &hours, |_| 1.0);
        match ingest(&recs) {
            Err(Error::Gap { timestamp, hours }) => {
                assert_eq!(timestamp, ts("2021-06-01 07:00"));
                assert_eq!(hours, 3);
            }
            other => panic!("expected gap error, got {other:?}"),
        }
    }

    #[test]
    fn triple_hour_rejected() {
        let mut hours: Vec<u32> = (0..24).collect();
        hours.insert(3, 2);
        hours.insert(3, 2);
        let recs = day_records("2021-10-31", &hours, |_| 1.0);
        assert!(matches!(ingest(&recs), Err(Error::Ingest(_))));
    }

    #[test]
    fn partial_last_day_rejected() {
        let hours: Vec<u32> = (0..20).collect();
        let recs = day_records("2021-06-01", &hours, |_| 1.0);
        assert!(matches!(ingest(&recs), Err(Error::Ingest(_))));
    }

    #[test]
    fn csv_missing_column_named() {
        let data = "timestamp,price,load_da\n2021-01-01 00:00,1,2\n";
        match read_records(data.as_bytes()) {
            Err(Error::MissingColumn(c)) => assert_eq!(c, "res_da"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn csv_non_numeric_reports_line() {
        let data = "timestamp,price,load_da,res_da\n2021-01-01 00:00,1,2,3\n2021-01-01 01:00,abc,2,3\n";
        match read_records(data.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn emit_then_ingest_is_identity() {
        let hours: Vec<u32> = (0..24).collect();
        let mut recs = day_records("2020-02-28", &hours, |h| (h as f64).sqrt() * 0.1 - 7.3);
        recs.extend(day_records("2020-02-29", &hours, |h| 1.0 / (h as f64 + 3.0)));
        let (panel, _) = ingest(&recs).unwrap();
        let mut buf = Vec::new();
        panel.write_csv(&mut buf).unwrap();
        let (again, report) = ingest_csv(buf.as_slice()).unwrap();
        assert!(report.repairs.is_empty());
        assert_eq!(panel, again);
    }

    #[test]
    fn weekday_dummies_sum_to_one() {
        let p = HourlyPanel::new(
            NaiveDate::from_ymd_opt(2019, 1, 1).unwrap(),
            vec![[0.0; 24]; 10],
            vec![[0.0; 24]; 10],
            vec![[0.0; 24]; 10],
        )
        .unwrap();
        // 2019-01-01 was a Tuesday.
        assert_eq!(p.weekday(0), 2);
        assert_eq!(p.weekday(6), 1);
        for d in 0..10 {
            assert_eq!(weekday_dummies(p.weekday(d)).iter().sum::<f64>(), 1.0);
        }
        let p = p.with_start_weekday(7).unwrap();
        assert_eq!(p.weekday(1), 1);
    }

    #[test]
    fn rolling_windows_full_scale() {
        let w = rolling_windows(3282, 1456, 1456, 3281).unwrap();
        assert_eq!(w.len(), 1826);
        assert_eq!(w[0].first_day, 0);
        assert_eq!(w[0].last_day, 1455);
        assert_eq!(w[0].target_day(), 1456);
        for pair in w.windows(2) {
            assert_eq!(pair[1].first_day, pair[0].first_day + 1);
            assert_eq!(pair[1].length_days(), 1456);
        }
    }

    #[test]
    fn rolling_windows_small_and_invalid() {
        let w = rolling_windows(4, 3, 3, 3).unwrap();
        assert_eq!(w, vec![CalibrationWindow { first_day: 0, last_day: 2 }]);
        assert!(matches!(rolling_windows(3282, 1456, 999, 3281), Err(Error::Config(_))));
        assert!(matches!(rolling_windows(100, 10, 20, 100), Err(Error::Config(_))));
    }
}
