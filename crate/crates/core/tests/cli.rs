use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use epfcast::config::KEYS;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_epfcast"));
    c.env("RUST_LOG", "info");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path, days: &str) -> PathBuf {
    let out = dir.join("fixture.csv");
    let cal = (days.parse::<usize>().unwrap() - 30).to_string();
    let o = run(&["synth", "--out", s(&out), "--days", days, "--calibration-days", &cal]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    out
}

fn backtest(data: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "backtest",
        "--data-path",
        s(data),
        "--output-dir",
        s(out),
        "--calibration-days",
        "100",
        "--model-classes",
        "ARX",
        "--rmae-window",
        "5",
    ];
    args.extend_from_slice(extra);
    run(&args)
}

const REPORTS: [&str; 6] = [
    "forecasts.csv",
    "failures.csv",
    "metrics.csv",
    "dm_pvalues.csv",
    "rmae.csv",
    "profits.csv",
];

fn read_all(dir: &Path) -> Vec<Vec<u8>> {
    REPORTS.iter().map(|f| fs::read(dir.join(f)).unwrap()).collect()
}

#[test]
fn help_lists_every_key_with_default() {
    let o = run(&["backtest", "--help"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for (k, d) in KEYS {
        let line = text.lines().find(|l| l.trim_start().starts_with(k)).unwrap_or_else(|| panic!("{k}"));
        assert!(line.contains(d), "{line}");
    }
    assert!(text.contains("1456"));
    assert_eq!(code(&run(&["--version"])), 0);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&run(&[])), 1);
    assert_eq!(code(&run(&["backtest", "--no-such-flag"])), 1);
    let o = run(&["backtest"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("data_path"));
    assert_eq!(code(&run(&["backtest", "--set", "bogus=1", "--data-path", "x.csv"])), 1);
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["synth", "--out", s(&dir.path().join("x.csv")), "--days", "50", "--calibration-days", "40"]);
    assert_eq!(code(&o), 1);
}

fn write_hours(path: &Path, hours: &[(String, f64)]) {
    let mut text = String::from("timestamp,price,load_da,res_da\n");
    for (ts, p) in hours {
        text.push_str(&format!("{ts},{p},100,10\n"));
    }
    fs::write(path, text).unwrap();
}

fn day_hours(date: &str, skip: &[u32]) -> Vec<(String, f64)> {
    (0..24)
        .filter(|h| !skip.contains(h))
        .map(|h| (format!("{date} {h:02}:00"), 30.0 + h as f64))
        .collect()
}

#[test]
fn ingest_reports_repairs_and_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.csv");
    let mut hours = day_hours("2020-03-28", &[]);
    hours.extend(day_hours("2020-03-29", &[2]));
    write_hours(&good, &hours);
    let out = dir.path().join("panel.csv");
    let o = run(&["ingest", s(&good), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("1 DST repairs"));
    let repairs = fs::read_to_string(dir.path().join("panel.repairs.csv")).unwrap();
    assert!(repairs.contains("2020-03-29 02:00,filled_missing"));
    // The clean panel is valid input again and needs no repair.
    let o = run(&["ingest", s(&out), "--out", s(&dir.path().join("again.csv"))]);
    assert!(stderr(&o).contains("0 DST repairs"));
    assert_eq!(fs::read(&out).unwrap(), fs::read(dir.path().join("again.csv")).unwrap());

    let gap = dir.path().join("gap.csv");
    write_hours(&gap, &day_hours("2020-01-01", &[5, 6]));
    let o = run(&["ingest", s(&gap)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("2020-01-01 07:00"), "{}", stderr(&o));

    let missing = dir.path().join("missing.csv");
    fs::write(&missing, "timestamp,price,load_da\n2020-01-01 00:00,1,2\n").unwrap();
    let o = run(&["ingest", s(&missing)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("res_da"));

    let o = run(&["ingest", s(&dir.path().join("absent.csv"))]);
    assert_eq!(code(&o), 2);
}

#[test]
fn synth_is_reproducible_and_ingestible() {
    let dir = tempfile::tempdir().unwrap();
    let a = synth(dir.path(), "140");
    let first = fs::read(&a).unwrap();
    let params = fs::read_to_string(dir.path().join("fixture.csv.params")).unwrap();
    assert!(params.contains("seed = 42"));
    assert!(params.contains("days = 140"));
    let a2 = synth(dir.path(), "140");
    assert_eq!(fs::read(&a2).unwrap(), first);

    // Regenerating from the sidecar alone reproduces the file.
    let b = dir.path().join("from_params.csv");
    let o = run(&[
        "synth",
        "--out",
        s(&b),
        "--params-file",
        s(&dir.path().join("fixture.csv.params")),
        "--calibration-days",
        "100",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(fs::read(&b).unwrap(), first);

    let other = dir.path().join("other.csv");
    run(&["synth", "--out", s(&other), "--days", "140", "--calibration-days", "100", "--seed", "7"]);
    assert_ne!(fs::read(&other).unwrap(), first);

    let clean = dir.path().join("clean.csv");
    let o = run(&["ingest", s(&a), "--out", s(&clean)]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read(&clean).unwrap(), first);
}

#[test]
fn backtest_writes_reports_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "112");
    let out = dir.path().join("out");
    let o = backtest(&data, &out, &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("12 to forecast"));
    let first = read_all(&out);

    let forecasts = String::from_utf8(first[0].clone()).unwrap();
    assert!(forecasts.starts_with("date,hour,variant,forecast\n"));
    assert_eq!(forecasts.lines().count(), 1 + 12 * 7 * 24);
    let metrics = String::from_utf8(first[2].clone()).unwrap();
    assert!(metrics.lines().nth(1).unwrap().starts_with("ARX,"));
    assert_eq!(metrics.lines().count(), 8);

    let o = backtest(&data, &out, &[]);
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("0 to forecast, 12 already done"), "{}", stderr(&o));
    assert_eq!(read_all(&out), first);

    // An interrupted run keeps its finished days.
    let keep: String = forecasts.lines().take(1 + 5 * 7 * 24).map(|l| format!("{l}\n")).collect();
    fs::write(out.join("forecasts.csv"), keep).unwrap();
    let o = backtest(&data, &out, &[]);
    assert!(stderr(&o).contains("7 to forecast, 5 already done"), "{}", stderr(&o));
    assert_eq!(read_all(&out), first);

    let o = backtest(&data, &out, &["--force"]);
    assert!(stderr(&o).contains("12 to forecast"));
    assert_eq!(read_all(&out), first);
}

#[test]
fn worker_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "106");
    let one = dir.path().join("one");
    let many = dir.path().join("many");
    assert_eq!(code(&backtest(&data, &one, &["--workers", "1"])), 0);
    assert_eq!(code(&backtest(&data, &many, &["--workers", "8"])), 0);
    assert_eq!(read_all(&one), read_all(&many));
}

#[test]
fn report_commands_reproduce_backtest_reports() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "108");
    let out = dir.path().join("out");
    assert_eq!(code(&backtest(&data, &out, &[])), 0);
    let expected: Vec<Vec<u8>> = ["metrics.csv", "rmae.csv", "dm_pvalues.csv", "profits.csv"]
        .iter()
        .map(|f| fs::read(out.join(f)).unwrap())
        .collect();
    let again = dir.path().join("again");
    let forecasts = out.join("forecasts.csv");
    for cmd in ["evaluate", "dm", "trade"] {
        let o = run(&[
            cmd,
            "--data-path",
            s(&data),
            "--output-dir",
            s(&again),
            "--forecasts",
            s(&forecasts),
            "--rmae-window",
            "5",
        ]);
        assert_eq!(code(&o), 0, "{cmd}: {}", stderr(&o));
    }
    let got: Vec<Vec<u8>> = ["metrics.csv", "rmae.csv", "dm_pvalues.csv", "profits.csv"]
        .iter()
        .map(|f| fs::read(again.join(f)).unwrap())
        .collect();
    assert_eq!(got, expected);

    let profits = String::from_utf8(got[3].clone()).unwrap();
    assert!(profits.lines().any(|l| l.starts_with("TOTAL,eSCARX-MAS,")));
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "104");
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        format!(
            "data_path = {}\ncalibration_days = 100\nmodel_classes = ARX\ndecompositions = NONE,eSC\npools = MAS\nrmae_window = 2\noutput_dir = {}\n",
            data.display(),
            dir.path().join("ignored").display()
        ),
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = run(&["backtest", "--config", s(&cfg), "--output-dir", s(&out), "--test-start", "2015-04-12"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(!dir.path().join("ignored").exists());
    let metrics = fs::read_to_string(out.join("metrics.csv")).unwrap();
    let names: Vec<&str> = metrics.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(names, ["ARX", "eSCARX-MAS"]);
    let forecasts = fs::read_to_string(out.join("forecasts.csv")).unwrap();
    assert!(forecasts.lines().nth(1).unwrap().starts_with("2015-04-12,1,ARX,"));

    fs::write(&cfg, "calibration_days = many\n").unwrap();
    assert_eq!(code(&run(&["backtest", "--config", s(&cfg)])), 1);
}

#[test]
fn dump_ltsc_writes_one_file_per_smoother() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "102");
    let out = dir.path().join("out");
    let o = backtest(&data, &out, &["--pools", "S", "--dump-ltsc", "2015-04-12"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let dumps: Vec<_> = fs::read_dir(&out)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().starts_with("ltsc_"))
        .collect();
    assert_eq!(dumps.len(), 5);
    let text = fs::read_to_string(dumps[0].path()).unwrap();
    assert!(text.starts_with("t,ltsc\n"));
    assert_eq!(text.lines().count(), 1 + 101 * 24);
}
