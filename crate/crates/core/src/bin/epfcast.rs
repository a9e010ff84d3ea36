use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use epfcast::config::{keys_help, RunConfig};
use epfcast::error::{Error, Result};
use epfcast::ltsc::{extended_ltsc, write_ltsc_csv};
use epfcast::pipeline::{Backtester, DayContext, ForecastMatrix, RegressionPredictor};
use epfcast::report::{self, FAILURES_FILE, FORECASTS_FILE};
use epfcast::synth::{self, SynthParams};
use epfcast::timeseries::{self, HourlyPanel};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "epfcast", version, about = "Day-ahead electricity price forecasting backtests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate an hourly CSV, repair DST hours and write the clean panel.
    Ingest {
        /// Input CSV with columns timestamp,price,load_da,res_da.
        csv: PathBuf,
        /// Clean panel output; defaults to <output_dir>/panel.csv.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Rolling-window backtest of every configured variant plus all reports.
    #[command(after_help = keys_help())]
    Backtest {
        #[command(flatten)]
        run: RunArgs,
        /// Recompute days already present in the forecast file.
        #[arg(long)]
        force: bool,
        /// Write the extended LTSC of each smoother for this date (YYYY-MM-DD).
        #[arg(long, value_name = "DATE")]
        dump_ltsc: Option<NaiveDate>,
    },
    /// MAE, RMSE and rolling rMAE from an existing forecast file.
    #[command(after_help = keys_help())]
    Evaluate {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        forecasts: Option<PathBuf>,
    },
    /// Pairwise Diebold-Mariano p-values from an existing forecast file.
    #[command(after_help = keys_help())]
    Dm {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        forecasts: Option<PathBuf>,
    },
    /// Battery trading profits from an existing forecast file.
    #[command(after_help = keys_help())]
    Trade {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        forecasts: Option<PathBuf>,
    },
    /// Generate a synthetic market CSV and a `.params` sidecar.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Defaults to calibration_days + 365.
        #[arg(long)]
        days: Option<usize>,
        /// Calibration window the data must support (days >= this + 30).
        #[arg(long, default_value_t = epfcast::pipeline::DEFAULT_CALIBRATION_DAYS)]
        calibration_days: usize,
        /// Generator parameter, `key=value`; repeatable.
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
        /// File of `key = value` generator parameters.
        #[arg(long)]
        params_file: Option<PathBuf>,
    },
}

/// Config file, then `--set`, then the per-key flags.
#[derive(Args, Debug, Default)]
struct RunArgs {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override any config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[arg(long)]
    data_path: Option<String>,
    #[arg(long)]
    calibration_days: Option<String>,
    #[arg(long)]
    test_start: Option<String>,
    #[arg(long)]
    test_end: Option<String>,
    #[arg(long)]
    model_classes: Option<String>,
    #[arg(long)]
    decompositions: Option<String>,
    #[arg(long)]
    pools: Option<String>,
    #[arg(long)]
    ma_levels: Option<String>,
    #[arg(long)]
    wavelet_levels: Option<String>,
    #[arg(long)]
    battery_capacity: Option<String>,
    #[arg(long)]
    battery_min_level: Option<String>,
    #[arg(long)]
    battery_efficiency: Option<String>,
    #[arg(long)]
    trade_volume: Option<String>,
    #[arg(long)]
    require_charge_first: bool,
    #[arg(long)]
    start_weekday: Option<String>,
    #[arg(long)]
    rmae_window: Option<String>,
    #[arg(long)]
    workers: Option<String>,
    #[arg(long)]
    output_dir: Option<String>,
    #[arg(long)]
    seed: Option<String>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut c = RunConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            c.apply_text(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        }
        for kv in &self.sets {
            let (k, v) = split_kv(kv)?;
            c.set(k, v)?;
        }
        let flags = [
            ("data_path", &self.data_path),
            ("calibration_days", &self.calibration_days),
            ("test_start", &self.test_start),
            ("test_end", &self.test_end),
            ("model_classes", &self.model_classes),
            ("decompositions", &self.decompositions),
            ("pools", &self.pools),
            ("ma_levels", &self.ma_levels),
            ("wavelet_levels", &self.wavelet_levels),
            ("battery_capacity", &self.battery_capacity),
            ("battery_min_level", &self.battery_min_level),
            ("battery_efficiency", &self.battery_efficiency),
            ("trade_volume", &self.trade_volume),
            ("start_weekday", &self.start_weekday),
            ("rmae_window", &self.rmae_window),
            ("workers", &self.workers),
            ("output_dir", &self.output_dir),
            ("seed", &self.seed),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                c.set(k, v)?;
            }
        }
        if self.require_charge_first {
            c.battery.charge_first = true;
        }
        Ok(c)
    }
}

fn split_kv(kv: &str) -> Result<(&str, &str)> {
    kv.split_once('=')
        .ok_or_else(|| Error::Config(format!("expected KEY=VALUE, got `{kv}`")))
}

fn init_pool(cfg: &RunConfig) -> Result<()> {
    if let Some(n) = cfg.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    }
    Ok(())
}

fn ingest_file(path: &Path) -> Result<(HourlyPanel, timeseries::IngestReport)> {
    let file = File::open(path).map_err(|e| Error::Ingest(format!("{}: {e}", path.display())))?;
    timeseries::ingest_csv(file)
}

fn load_panel(cfg: &RunConfig) -> Result<HourlyPanel> {
    let path = cfg
        .data_path
        .as_ref()
        .ok_or_else(|| Error::Config("data_path is required".into()))?;
    let (panel, rep) = ingest_file(path)?;
    info!(
        "{}: {} days from {}, {} DST repairs",
        path.display(),
        panel.days(),
        panel.start_date(),
        rep.repairs.len()
    );
    match cfg.start_weekday {
        Some(w) => panel.with_start_weekday(w),
        None => Ok(panel),
    }
}

fn day_of(panel: &HourlyPanel, date: NaiveDate, key: &str) -> Result<usize> {
    panel
        .day_of(date)
        .ok_or_else(|| Error::Config(format!("{key} {date} is outside the data")))
}

fn test_days(panel: &HourlyPanel, cfg: &RunConfig) -> Result<Vec<usize>> {
    let start = match cfg.test_start {
        Some(d) => day_of(panel, d, "test_start")?,
        None => cfg.calibration_days,
    };
    let end = match cfg.test_end {
        Some(d) => day_of(panel, d, "test_end")?,
        None => panel.days().saturating_sub(1),
    };
    if start >= panel.days() {
        return Err(Error::InsufficientData {
            needed: start + 1,
            got: panel.days(),
        });
    }
    let windows = timeseries::rolling_windows(panel.days(), cfg.calibration_days, start, end)?;
    Ok(windows.iter().map(|w| w.target_day()).collect())
}

fn cmd_ingest(csv: &Path, out: Option<PathBuf>, run: &RunArgs) -> Result<()> {
    let cfg = run.resolve()?;
    let (panel, rep) = ingest_file(csv)?;
    let out = out.unwrap_or_else(|| cfg.output_dir.join("panel.csv"));
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    panel.write_csv(BufWriter::new(File::create(&out)?))?;
    let report_path = out.with_extension("repairs.csv");
    let mut w = csv::Writer::from_path(&report_path)?;
    w.write_record(["timestamp", "repair"])?;
    for r in &rep.repairs {
        let kind = match r.kind {
            timeseries::RepairKind::FilledMissing => "filled_missing",
            timeseries::RepairKind::MergedDuplicate => "merged_duplicate",
        };
        w.write_record([r.timestamp.format(timeseries::TIMESTAMP_FORMAT).to_string(), kind.to_string()])?;
    }
    w.flush()?;
    info!(
        "{} records, {} days, {} DST repairs; wrote {} and {}",
        rep.records,
        panel.days(),
        rep.repairs.len(),
        out.display(),
        report_path.display()
    );
    Ok(())
}

fn cmd_backtest(run: &RunArgs, force: bool, dump_ltsc: Option<NaiveDate>) -> Result<()> {
    let cfg = run.resolve()?;
    let config = cfg.backtest_config()?;
    init_pool(&cfg)?;
    let panel = load_panel(&cfg)?;
    let days = test_days(&panel, &cfg)?;
    let variants = config.variants();
    fs::create_dir_all(&cfg.output_dir)?;
    let forecasts_path = cfg.output_dir.join(FORECASTS_FILE);
    let failures_path = cfg.output_dir.join(FAILURES_FILE);
    if force {
        for p in [&forecasts_path, &failures_path] {
            if p.exists() {
                fs::remove_file(p)?;
            }
        }
    }

    let stored = if forecasts_path.exists() {
        report::read_forecasts(&forecasts_path, &panel)?
    } else {
        Default::default()
    };
    let old_failures = if failures_path.exists() {
        report::read_failures(&failures_path, &panel)?
    } else {
        Vec::new()
    };
    let failed: BTreeSet<_> = old_failures.iter().map(|f| (f.day, f.variant)).collect();
    let done = |d: usize| {
        variants
            .iter()
            .all(|v| stored.contains_key(&(d, *v)) || failed.contains(&(d, *v)))
    };
    let todo: Vec<usize> = days.iter().copied().filter(|&d| !done(d)).collect();
    info!(
        "{} test days, {} variants: {} to forecast, {} already done",
        days.len(),
        variants.len(),
        todo.len(),
        days.len() - todo.len()
    );

    let predictor = RegressionPredictor { lasso: config.lasso };
    let backtester = Backtester::new(config, &predictor);
    let log = report::ForecastLog::open(&forecasts_path)?;
    let finished = AtomicUsize::new(0);
    let write_error: Mutex<Option<Error>> = Mutex::new(None);
    let started = Instant::now();
    let output = backtester.run(&panel, &todo, |day| {
        if let Err(e) = log.record(&panel, day) {
            write_error.lock().expect("error slot").get_or_insert(e);
        }
        let n = finished.fetch_add(1, Ordering::Relaxed) + 1;
        let failures = day.values.iter().filter(|(_, r)| r.is_err()).count();
        info!(
            "{} done ({n}/{}, {:.1} s){}",
            panel.date(day.day),
            todo.len(),
            started.elapsed().as_secs_f64(),
            if failures > 0 { format!(", {failures} variants failed") } else { String::new() }
        );
    })?;
    drop(log);
    if let Some(e) = write_error.into_inner().expect("error slot") {
        return Err(e);
    }

    let mut matrix = ForecastMatrix::new(variants.clone(), days.clone());
    for (&(d, v), row) in &stored {
        if matrix.day_index(d).is_some() && matrix.variant_index(v).is_some() {
            matrix.set(v, d, *row)?;
        }
    }
    for &d in output.matrix.days() {
        for &v in output.matrix.variants() {
            if output.matrix.is_filled(v, d) {
                matrix.set(v, d, *output.matrix.get(v, d).expect("filled"))?;
            }
        }
    }
    let recomputed: BTreeSet<usize> = todo.iter().copied().collect();
    let mut failures: Vec<_> = old_failures
        .into_iter()
        .filter(|f| matrix.day_index(f.day).is_some() && !recomputed.contains(&f.day))
        .collect();
    failures.extend(output.failures);
    for f in &failures {
        warn!("{} {}: {}", panel.date(f.day), f.variant, f.message);
    }
    report::write_forecasts(&forecasts_path, &panel, &matrix)?;
    report::write_failures(&failures_path, &panel, &failures)?;

    let cells = days.len() * variants.len();
    if failures.len() == cells {
        return Err(Error::AllFailed(cells));
    }
    write_reports(&cfg, &panel, &matrix)?;

    if let Some(date) = dump_ltsc {
        dump_ltsc_for(&cfg, &panel, &backtester, date)?;
    }
    info!("backtest finished in {:.1} s", started.elapsed().as_secs_f64());
    Ok(())
}

fn write_reports(cfg: &RunConfig, panel: &HourlyPanel, matrix: &ForecastMatrix) -> Result<()> {
    let written = report::write_all(&cfg.output_dir, panel, matrix, &cfg.battery, cfg.rmae_window)?;
    for note in &written.notes {
        warn!("{note}");
    }
    for f in &written.files {
        info!("wrote {}", f.display());
    }
    Ok(())
}

fn dump_ltsc_for(cfg: &RunConfig, panel: &HourlyPanel, bt: &Backtester<'_>, date: NaiveDate) -> Result<()> {
    let day = day_of(panel, date, "dump_ltsc")?;
    let ctx = DayContext::new(panel, bt.window_for(day)?)?;
    for &class in &bt.config.classes {
        let base = bt.forecast_base(&ctx, class)?;
        for spec in bt.config.active_specs() {
            let path = cfg.output_dir.join(format!("ltsc_{date}_{class}_{spec}.csv"));
            let full = extended_ltsc(&ctx.prices, &base, spec)?;
            write_ltsc_csv(BufWriter::new(File::create(&path)?), &full)?;
            info!("wrote {}", path.display());
        }
    }
    Ok(())
}

/// Panel and stored forecasts for the report-only subcommands.
fn load_existing(run: &RunArgs, forecasts: Option<PathBuf>) -> Result<(RunConfig, HourlyPanel, ForecastMatrix)> {
    let cfg = run.resolve()?;
    cfg.battery.validate()?;
    let panel = load_panel(&cfg)?;
    let path = forecasts.unwrap_or_else(|| cfg.output_dir.join(FORECASTS_FILE));
    if !path.exists() {
        return Err(Error::Config(format!("forecast file {} not found", path.display())));
    }
    let stored = report::read_forecasts(&path, &panel)?;
    let matrix = report::matrix_from_stored(&stored)?;
    fs::create_dir_all(&cfg.output_dir)?;
    Ok((cfg, panel, matrix))
}

fn cmd_evaluate(run: &RunArgs, forecasts: Option<PathBuf>) -> Result<()> {
    let (cfg, panel, matrix) = load_existing(run, forecasts)?;
    let actual = report::actual_rows(&panel, &matrix);
    let path = cfg.output_dir.join(report::METRICS_FILE);
    report::write_metrics(&path, &report::compute_metrics(&actual, &matrix))?;
    info!("wrote {}", path.display());
    let path = cfg.output_dir.join(report::RMAE_FILE);
    if report::write_rmae(&path, &panel, &matrix, cfg.rmae_window)? {
        info!("wrote {}", path.display());
    } else {
        warn!("rMAE skipped: needs the ARX series and at least {} days", cfg.rmae_window);
    }
    Ok(())
}

fn cmd_dm(run: &RunArgs, forecasts: Option<PathBuf>) -> Result<()> {
    let (cfg, panel, matrix) = load_existing(run, forecasts)?;
    let actual = report::actual_rows(&panel, &matrix);
    let dm = report::dm_for_matrix(&actual, &matrix)?;
    let path = cfg.output_dir.join(report::DM_FILE);
    report::write_dm(&path, matrix.variants(), &dm)?;
    info!("wrote {}", path.display());
    Ok(())
}

fn cmd_trade(run: &RunArgs, forecasts: Option<PathBuf>) -> Result<()> {
    let (cfg, panel, matrix) = load_existing(run, forecasts)?;
    let path = cfg.output_dir.join(report::PROFITS_FILE);
    report::write_profits(&path, &panel, &matrix, &cfg.battery)?;
    info!("wrote {}", path.display());
    Ok(())
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".params");
    PathBuf::from(s)
}

fn cmd_synth(
    out: &Path,
    seed: Option<u64>,
    days: Option<usize>,
    calibration_days: usize,
    params: &[String],
    params_file: Option<&Path>,
) -> Result<()> {
    let mut p = SynthParams {
        days: calibration_days + 365,
        ..Default::default()
    };
    if let Some(path) = params_file {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        p.apply_text(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    }
    for kv in params {
        let (k, v) = split_kv(kv)?;
        p.set(k, v)?;
    }
    if let Some(s) = seed {
        p.seed = s;
    }
    if let Some(d) = days {
        p.days = d;
    }
    if p.days < calibration_days + 30 {
        return Err(Error::Config(format!(
            "days {} must be at least calibration_days + 30 = {}",
            p.days,
            calibration_days + 30
        )));
    }
    let panel = synth::generate(&p)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    panel.write_csv(BufWriter::new(File::create(out)?))?;
    let side = sidecar_path(out);
    fs::write(&side, p.to_text())?;
    info!("wrote {} days to {} and parameters to {}", p.days, out.display(), side.display());
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidLevel { .. } => EXIT_USAGE,
        e if e.is_data_error() => EXIT_DATA,
        _ => EXIT_RUNTIME,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Ingest { csv, out, run } => cmd_ingest(csv, out.clone(), run),
        Command::Backtest { run, force, dump_ltsc } => cmd_backtest(run, *force, *dump_ltsc),
        Command::Evaluate { run, forecasts } => cmd_evaluate(run, forecasts.clone()),
        Command::Dm { run, forecasts } => cmd_dm(run, forecasts.clone()),
        Command::Trade { run, forecasts } => cmd_trade(run, forecasts.clone()),
        Command::Synth {
            out,
            seed,
            days,
            calibration_days,
            params,
            params_file,
        } => cmd_synth(out, *seed, *days, *calibration_days, params, params_file.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
