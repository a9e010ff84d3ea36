use chrono::NaiveDate;
use proptest::prelude::*;

use epfcast::eval::{daily_errors, dm_test, mae, rmae_rolling};
use epfcast::ltsc::{extrapolated_ltsc, ma_smooth, naive_ltsc_forecast, wavelet_smooth, Decomposition, LtscSpec};
use epfcast::pipeline::combine;
use epfcast::regress::{lasso_fit, ols_fit, DesignMatrix, Matrix};
use epfcast::timeseries::{ingest_csv, rolling_windows, weekday_dummies, DayRow, HourlyPanel, HOURS};
use epfcast::trading::{crystal_ball_profit, strategy_profit, BatterySpec};
use epfcast::vst::Normalizer;
use epfcast::wavelet::{wavedec, waverec, FilterBank};

fn day_row() -> impl Strategy<Value = DayRow> {
    prop::array::uniform24(-500.0f64..3000.0)
}

fn days(n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<DayRow>> {
    prop::collection::vec(day_row(), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ingest_of_emitted_panel_is_identity(
        price in days(1..6),
        offset in 0i64..3000,
        scale in 0.5f64..2.0,
    ) {
        let start = NaiveDate::from_ymd_opt(2016, 1, 1).unwrap() + chrono::Duration::days(offset);
        let load: Vec<DayRow> = price.iter().map(|r| r.map(|v| v * scale + 1e4)).collect();
        let res: Vec<DayRow> = price.iter().map(|r| r.map(|v| (v / 7.0).abs())).collect();
        let panel = HourlyPanel::new(start, price, load, res).unwrap();
        let mut buf = Vec::new();
        panel.write_csv(&mut buf).unwrap();
        let (back, report) = ingest_csv(buf.as_slice()).unwrap();
        prop_assert!(report.repairs.is_empty());
        prop_assert_eq!(back, panel);
    }

    #[test]
    fn consecutive_windows_overlap(len in 1usize..60, extra in 0usize..40, span in 0usize..30) {
        let start = len + extra;
        let windows = rolling_windows(start + span + 1, len, start, start + span).unwrap();
        prop_assert_eq!(windows.len(), span + 1);
        for w in windows.windows(2) {
            prop_assert_eq!(w[0].length_days(), len);
            prop_assert_eq!(w[1].first_day, w[0].first_day + 1);
            prop_assert_eq!(w[0].days().filter(|d| w[1].days().contains(d)).count(), len - 1);
        }
    }

    #[test]
    fn weekday_dummies_are_one_hot(w in 1u8..=7) {
        prop_assert_eq!(weekday_dummies(w).iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn vst_keeps_hourly_order(window in prop::collection::vec(-200.0f64..500.0, 48..200), day in day_row()) {
        let norm = Normalizer::fit(&window).unwrap();
        prop_assume!(!norm.is_degenerate());
        let t = day.map(|v| norm.transform(v).unwrap());
        let arg = |r: &DayRow, better: fn(f64, f64) -> bool| {
            (1..HOURS).fold(0, |b, h| if better(r[h], r[b]) { h } else { b })
        };
        prop_assert_eq!(arg(&day, |a, b| a > b), arg(&t, |a, b| a > b));
        prop_assert_eq!(arg(&day, |a, b| a < b), arg(&t, |a, b| a < b));
        for (x, y) in day.iter().zip(&t) {
            let back = norm.inverse(*y).unwrap();
            prop_assert!((back - x).abs() <= 1e-10 * x.abs().max(1.0));
        }
    }

    #[test]
    fn ltsc_lengths_and_additivity(x in prop::collection::vec(-100.0f64..400.0, 24 * 130..24 * 140)) {
        let ma = ma_smooth(&x, 7).unwrap();
        prop_assert_eq!(ma.len(), x.len());
        prop_assert_eq!(wavelet_smooth(&x, 5).unwrap().len(), x.len());
        for spec in [LtscSpec::moving_average(28).unwrap(), LtscSpec::wavelet(7).unwrap()] {
            let d = Decomposition::new(&x, spec).unwrap();
            for ((v, l), s) in x.iter().zip(&d.ltsc).zip(&d.stochastic) {
                prop_assert_eq!(*s, v - l);
                prop_assert!((l + s - v).abs() <= 1e-12 * v.abs().max(1.0));
            }
        }
    }

    #[test]
    fn full_wavelet_round_trip(x in prop::collection::vec(-1e3f64..1e3, 64..700), levels in 1u32..5) {
        let bank = FilterBank::daubechies24();
        let back = waverec(&bank, &wavedec(&bank, &x, levels).unwrap()).unwrap();
        prop_assert_eq!(back.len(), x.len());
        for (a, b) in back.iter().zip(&x) {
            prop_assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn constant_window_gives_equal_ltsc_forecasts(c in -50.0f64..300.0, level in prop::sample::select(vec![1u32, 7, 28])) {
        let window = vec![c; 24 * 100];
        let spec = LtscSpec::moving_average(level).unwrap();
        let naive = naive_ltsc_forecast(&window, spec).unwrap();
        let ext = extrapolated_ltsc(&window, &[c; HOURS], spec).unwrap();
        prop_assert_eq!(naive.target, ext.target);
    }

    #[test]
    fn combine_ignores_order(mut pool in days(1..8), seed in any::<u64>()) {
        let a = combine(&pool).unwrap();
        let n = pool.len();
        pool.rotate_left((seed as usize) % n);
        pool.reverse();
        let b = combine(&pool).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }

    #[test]
    fn lasso_at_zero_matches_ols(rows in prop::collection::vec(prop::array::uniform4(-3.0f64..3.0), 12..30), coef in prop::array::uniform4(-2.0f64..2.0)) {
        let y: Vec<f64> = rows.iter().enumerate()
            .map(|(i, r)| r.iter().zip(&coef).map(|(a, b)| a * b).sum::<f64>() + (i as f64 * 0.37).sin())
            .collect();
        // A constant column stands in for the intercept OLS lacks.
        let with_one: Vec<[f64; 5]> = rows.iter().map(|r| [1.0, r[0], r[1], r[2], r[3]]).collect();
        let ols = ols_fit(&DesignMatrix::new(Matrix::from_rows(&with_one).unwrap(), y.clone()).unwrap()).unwrap();
        let lasso = lasso_fit(&DesignMatrix::new(Matrix::from_rows(&rows).unwrap(), y).unwrap(), 0.0).unwrap();
        for (r, w) in rows.iter().zip(&with_one) {
            prop_assert!((ols.predict(w) - lasso.predict(r)).abs() < 1e-6);
        }
    }

    #[test]
    fn mae_shift_equals_constant(actual in days(1..10), c in -100.0f64..100.0) {
        let shifted: Vec<DayRow> = actual.iter().map(|r| r.map(|v| v + c)).collect();
        let m = mae(&actual, &shifted).unwrap();
        prop_assert!((m.value - c.abs()).abs() < 1e-9);
    }

    #[test]
    fn dm_statistic_is_antisymmetric(a in days(30..60), b in days(30..60)) {
        let n = a.len().min(b.len());
        let actual = vec![[0.0; HOURS]; n];
        let ea = daily_errors(&actual, &a[..n]).unwrap();
        let eb = daily_errors(&actual, &b[..n]).unwrap();
        let ab = dm_test(&ea, &eb).unwrap();
        let ba = dm_test(&eb, &ea).unwrap();
        prop_assert_eq!(ab.statistic, -ba.statistic);
    }

    #[test]
    fn benchmark_rmae_is_one(e in days(5..30), w in 1usize..5) {
        for r in rmae_rolling(&e, &e, w).unwrap() {
            prop_assert_eq!(r, 1.0);
        }
    }

    #[test]
    fn strategy_never_beats_crystal_ball(prices in day_row(), forecast in day_row(), charge_first in any::<bool>()) {
        let spec = BatterySpec { charge_first, ..Default::default() };
        let cb = crystal_ball_profit(&prices, &spec);
        prop_assert!(strategy_profit(&prices, &forecast, &spec).profit <= cb.profit);
    }

    #[test]
    fn strategy_ignores_monotone_transforms(prices in day_row(), forecast in day_row()) {
        let spec = BatterySpec::default();
        let t = forecast.map(|v| (v / 100.0).exp() * 3.0 - 7.0);
        let a = strategy_profit(&prices, &forecast, &spec);
        let b = strategy_profit(&prices, &t, &spec);
        prop_assert_eq!((a.h1, a.h2), (b.h1, b.h2));
        prop_assert_eq!(a.profit, b.profit);
    }

    #[test]
    fn doubling_volume_doubles_profit(prices in day_row(), forecast in day_row()) {
        let one = BatterySpec::default();
        let two = BatterySpec { trade_volume: 2.0, ..one };
        prop_assert_eq!(strategy_profit(&prices, &forecast, &two).profit, 2.0 * strategy_profit(&prices, &forecast, &one).profit);
        prop_assert_eq!(crystal_ball_profit(&prices, &two).profit, 2.0 * crystal_ball_profit(&prices, &one).profit);
    }
}
