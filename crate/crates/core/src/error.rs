use chrono::NaiveDateTime;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("missing required column `{0}`")]
    MissingColumn(String),

    #[error("gap of {hours} hours ending at {timestamp}; only single missing hours are repaired")]
    Gap { timestamp: NaiveDateTime, hours: i64 },

    #[error("ingestion: {0}")]
    Ingest(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("degenerate normalizer (MAD = 0, median {median}): constant calibration window")]
    DegenerateNormalizer { median: f64 },

    #[error("input too short: need at least {needed} values, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("invalid smoothing level {level} for {method}")]
    InvalidLevel { method: &'static str, level: u32 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("design matrix column {column} is not standardized")]
    NotStandardized { column: usize },

    #[error("coordinate descent did not converge after {sweeps} sweeps (lambda {lambda:e}, last max change {max_change:e})")]
    NotConverged {
        sweeps: usize,
        lambda: f64,
        max_change: f64,
    },

    #[error("least squares: {0}")]
    LeastSquares(String),

    #[error("loss differential is identically constant; DM statistic undefined")]
    DegenerateLossDifferential,

    #[error("not enough data: need {needed} days, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("benchmark MAE is zero")]
    ZeroBenchmark,

    #[error("crystal-ball profit total {0} is not positive; cannot normalize")]
    NonPositiveCrystalBall(f64),

    #[error("all {0} forecasts failed")]
    AllFailed(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by the input data rather than by the program.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::MissingColumn(_)
                | Error::Gap { .. }
                | Error::Ingest(_)
                | Error::Csv(_)
                | Error::Shape(_)
                | Error::TooShort { .. }
                | Error::InsufficientData { .. }
        )
    }
}
