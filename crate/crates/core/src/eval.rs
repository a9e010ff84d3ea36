//! Point-forecast error metrics and the Diebold-Mariano test.
//!
//! Days with a non-finite value in either series are dropped pairwise and
//! counted in the result.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::timeseries::{DayRow, HOURS};

pub const RMAE_WINDOW: usize = 365;
pub const DM_MIN_DAYS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metric {
    pub value: f64,
    pub days_used: usize,
    pub days_excluded: usize,
}

fn finite_day(row: &DayRow) -> bool {
    row.iter().all(|v| v.is_finite())
}

/// Forecast errors `actual - forecast`; a day is NaN throughout if either
/// side has a non-finite entry.
pub fn daily_errors(actual: &[DayRow], forecast: &[DayRow]) -> Result<Vec<DayRow>> {
    check_shapes(actual.len(), forecast.len())?;
    Ok(actual
        .iter()
        .zip(forecast)
        .map(|(a, f)| {
            if finite_day(a) && finite_day(f) {
                std::array::from_fn(|h| a[h] - f[h])
            } else {
                [f64::NAN; HOURS]
            }
        })
        .collect())
}

fn check_shapes(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Shape(format!("series cover {a} and {b} days")));
    }
    Ok(())
}

fn mean_loss(actual: &[DayRow], forecast: &[DayRow], loss: impl Fn(f64) -> f64) -> Result<Metric> {
    check_shapes(actual.len(), forecast.len())?;
    let mut sum = 0.0;
    let mut used = 0;
    for (a, f) in actual.iter().zip(forecast) {
        if finite_day(a) && finite_day(f) {
            sum += a.iter().zip(f).map(|(a, f)| loss(a - f)).sum::<f64>();
            used += 1;
        }
    }
    if used == 0 {
        return Err(Error::Empty("metric overlap"));
    }
    Ok(Metric {
        value: sum / (HOURS * used) as f64,
        days_used: used,
        days_excluded: actual.len() - used,
    })
}

pub fn mae(actual: &[DayRow], forecast: &[DayRow]) -> Result<Metric> {
    mean_loss(actual, forecast, f64::abs)
}

pub fn rmse(actual: &[DayRow], forecast: &[DayRow]) -> Result<Metric> {
    let mut m = mean_loss(actual, forecast, |e| e * e)?;
    m.value = m.value.sqrt();
    Ok(m)
}

/// Rolling ratio of model MAE to benchmark MAE. Entry `i` covers days
/// `i..i + window`; the series has `n - window + 1` entries. Spans where
/// every day was excluded give NaN.
pub fn rmae_rolling(model_errors: &[DayRow], benchmark_errors: &[DayRow], window: usize) -> Result<Vec<f64>> {
    check_shapes(model_errors.len(), benchmark_errors.len())?;
    let n = model_errors.len();
    if window == 0 || n < window {
        return Err(Error::InsufficientData { needed: window, got: n });
    }
    let abs_sum = |row: &DayRow| row.iter().map(|e| e.abs()).sum::<f64>();
    let pairs: Vec<Option<(f64, f64)>> = model_errors
        .iter()
        .zip(benchmark_errors)
        .map(|(m, b)| (finite_day(m) && finite_day(b)).then(|| (abs_sum(m), abs_sum(b))))
        .collect();
    let mut out = Vec::with_capacity(n - window + 1);
    for span in pairs.windows(window) {
        let (mut m, mut b, mut k) = (0.0, 0.0, 0usize);
        for (pm, pb) in span.iter().flatten() {
            m += pm;
            b += pb;
            k += 1;
        }
        if k == 0 {
            out.push(f64::NAN);
        } else if b == 0.0 {
            return Err(Error::ZeroBenchmark);
        } else {
            out.push(m / b);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmResult {
    pub statistic: f64,
    /// `1 - Phi(statistic)`; small values favour the second argument.
    pub p_value: f64,
    pub n_days: usize,
}

/// One-sided Diebold-Mariano test on the daily L1 loss differential
/// `|e_A|_1 - |e_B|_1`.
pub fn dm_test(errors_a: &[DayRow], errors_b: &[DayRow]) -> Result<DmResult> {
    check_shapes(errors_a.len(), errors_b.len())?;
    let l1 = |row: &DayRow| row.iter().map(|e| e.abs()).sum::<f64>();
    let delta: Vec<f64> = errors_a
        .iter()
        .zip(errors_b)
        .filter(|(a, b)| finite_day(a) && finite_day(b))
        .map(|(a, b)| l1(a) - l1(b))
        .collect();
    dm_from_differential(&delta)
}

/// DM statistic on a precomputed loss differential series.
pub fn dm_from_differential(delta: &[f64]) -> Result<DmResult> {
    let n = delta.len();
    if n < DM_MIN_DAYS {
        return Err(Error::InsufficientData {
            needed: DM_MIN_DAYS,
            got: n,
        });
    }
    if delta.iter().all(|d| *d == 0.0) {
        return Err(Error::DegenerateLossDifferential);
    }
    let nf = n as f64;
    let mean = delta.iter().sum::<f64>() / nf;
    let var = delta.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (nf - 1.0);
    let statistic = nf.sqrt() * mean / var.sqrt();
    let p_value = Normal::standard().sf(statistic);
    Ok(DmResult {
        statistic,
        p_value,
        n_days: n,
    })
}

/// Pairwise DM tests; `cell(i, j)` tests row `i` against column `j`.
#[derive(Debug)]
pub struct DmMatrix {
    k: usize,
    cells: Vec<Option<Result<DmResult>>>,
}

impl DmMatrix {
    pub fn size(&self) -> usize {
        self.k
    }

    /// `None` on the diagonal.
    pub fn cell(&self, i: usize, j: usize) -> Option<&Result<DmResult>> {
        self.cells[i * self.k + j].as_ref()
    }

    /// NaN on the diagonal and for failed tests.
    pub fn p_value(&self, i: usize, j: usize) -> f64 {
        match self.cell(i, j) {
            Some(Ok(r)) => r.p_value,
            _ => f64::NAN,
        }
    }
}

pub fn dm_matrix(errors: &[&[DayRow]]) -> Result<DmMatrix> {
    use rayon::prelude::*;
    let k = errors.len();
    if k < 2 {
        return Err(Error::InsufficientData { needed: 2, got: k });
    }
    let cells = (0..k * k)
        .into_par_iter()
        .map(|c| {
            let (i, j) = (c / k, c % k);
            (i != j).then(|| dm_test(errors[i], errors[j]))
        })
        .collect();
    Ok(DmMatrix { k, cells })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(vals: &[[f64; 2]]) -> Vec<DayRow> {
        // Each entry sets hours 0 and 1; the rest are zero.
        vals.iter()
            .map(|v| {
                let mut r = [0.0; HOURS];
                r[0] = v[0];
                r[1] = v[1];
                r
            })
            .collect()
    }

    #[test]
    fn perfect_forecast_is_zero() {
        let a: Vec<DayRow> = (0..3).map(|d| std::array::from_fn(|h| (d * 24 + h) as f64)).collect();
        assert_eq!(mae(&a, &a).unwrap().value, 0.0);
        assert_eq!(rmse(&a, &a).unwrap().value, 0.0);
    }

    #[test]
    fn constant_error() {
        let a = vec![[10.0; HOURS]; 4];
        let f = vec![[8.0; HOURS]; 4];
        assert_eq!(mae(&a, &f).unwrap().value, 2.0);
    }

    #[test]
    fn hand_fixture() {
        let a = rows(&[[3.0, 0.0], [0.0, 0.0]]);
        let f = rows(&[[0.0, 0.0], [-3.0, 0.0]]);
        // Errors +3 and -3 among 48 cells.
        let m = mae(&a, &f).unwrap();
        assert!((m.value - 6.0 / 48.0).abs() < 1e-15);
        let r = rmse(&a, &f).unwrap();
        assert!((r.value - (18.0f64 / 48.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn four_cell_rmse() {
        // Errors {+3, -3, 0, 0} spread so that each day averages the same.
        let a = vec![[3.0; HOURS], [-3.0; HOURS], [0.0; HOURS], [0.0; HOURS]];
        let f = vec![[0.0; HOURS]; 4];
        assert!((rmse(&a, &f).unwrap().value - 2.1213203435596424).abs() < 1e-12);
    }

    #[test]
    fn nan_days_excluded() {
        let a = vec![[1.0; HOURS], [2.0; HOURS], [3.0; HOURS]];
        let mut f = vec![[0.0; HOURS]; 3];
        f[1][5] = f64::NAN;
        let m = mae(&a, &f).unwrap();
        assert_eq!((m.value, m.days_used, m.days_excluded), (2.0, 2, 1));
        let all_nan = vec![[f64::NAN; HOURS]; 3];
        assert!(matches!(mae(&a, &all_nan), Err(Error::Empty(_))));
    }

    #[test]
    fn rmae_identities() {
        let e: Vec<DayRow> = (0..400).map(|d| std::array::from_fn(|h| ((d * 7 + h * 3) % 11) as f64 - 5.0)).collect();
        let r = rmae_rolling(&e, &e, RMAE_WINDOW).unwrap();
        assert_eq!(r.len(), 400 - 365 + 1);
        assert!(r.iter().all(|v| *v == 1.0));
        let doubled: Vec<DayRow> = e.iter().map(|row| row.map(|v| 2.0 * v)).collect();
        assert!(rmae_rolling(&doubled, &e, RMAE_WINDOW).unwrap().iter().all(|v| *v == 2.0));
        let zero = vec![[0.0; HOURS]; 400];
        assert!(matches!(rmae_rolling(&e, &zero, RMAE_WINDOW), Err(Error::ZeroBenchmark)));
        assert!(rmae_rolling(&e[..100], &e[..100], RMAE_WINDOW).is_err());
    }

    #[test]
    fn dm_degenerate_and_short() {
        let e: Vec<DayRow> = (0..40).map(|d| [d as f64; HOURS]).collect();
        assert!(matches!(dm_test(&e, &e), Err(Error::DegenerateLossDifferential)));
        assert!(matches!(
            dm_test(&e[..10], &e[..10]),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn dm_large_positive_differential() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, Normal as N};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let d = N::new(1.0, 0.1).unwrap();
        let delta: Vec<f64> = (0..100).map(|_| d.sample(&mut rng)).collect();
        let r = dm_from_differential(&delta).unwrap();
        assert!(r.p_value < 1e-10);
        // Closed form from the sample moments.
        let mean = delta.iter().sum::<f64>() / 100.0;
        let sd = (delta.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 99.0).sqrt();
        assert!((r.statistic - 10.0 * mean / sd).abs() < 1e-9);
    }

    #[test]
    fn matrix_shape_and_sign_symmetry() {
        let a: Vec<DayRow> = (0..50).map(|d| [((d * 13) % 7) as f64; HOURS]).collect();
        let b: Vec<DayRow> = (0..50).map(|d| [((d * 5) % 9) as f64 - 1.0; HOURS]).collect();
        let m = dm_matrix(&[&a, &b]).unwrap();
        assert_eq!(m.size(), 2);
        assert!(m.cell(0, 0).is_none() && m.p_value(1, 1).is_nan());
        let s01 = m.cell(0, 1).unwrap().as_ref().unwrap().statistic;
        let s10 = m.cell(1, 0).unwrap().as_ref().unwrap().statistic;
        assert_eq!(s01, -s10);
        assert!((m.p_value(0, 1) + m.p_value(1, 0) - 1.0).abs() < 1e-12);
    }
}
