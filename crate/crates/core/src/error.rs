use thiserror::Error;

/// Errors raised anywhere in the estimation pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{count} of {total} samples are non-positive or at the supply voltage")]
    InvalidVoltage { count: usize, total: usize },
    #[error("baseline window of {window_s} s exceeds series duration {duration_s} s")]
    WindowTooLong { window_s: f64, duration_s: f64 },
    #[error("baseline resistance must be positive, got {0}")]
    NonPositiveBaseline(f64),
    #[error("recordings overlap for {overlap_s:.3} s, need at least {required_s} s")]
    InsufficientOverlap { overlap_s: f64, required_s: f64 },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("unit error: {0}")]
    Unit(String),
    #[error("empty file: {0}")]
    EmptyFile(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("lti block is unstable")]
    UnstableBlock,
    #[error("channel length mismatch: {0}")]
    LengthMismatch(String),
    #[error("regressor matrix is rank deficient")]
    RankDeficientRegressor,
    #[error("optimization diverged: {0}")]
    DivergedOptimization(String),
    #[error("channel {0} has zero variance")]
    DegenerateChannel(String),
    #[error("no gait cycles found")]
    NoCyclesFound,
    #[error("need at least two gait events, got {0}")]
    FewerThanTwoEvents(usize),
    #[error("reference series is constant")]
    ConstantReference,
    #[error("normalizer is degenerate: {0}")]
    DegenerateNormalizer(String),
    #[error("model format error: {0}")]
    ModelFormat(String),
}

impl Error {
    /// Process exit code class used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::UnstableBlock | Error::DivergedOptimization(_) => 3,
            Error::RankDeficientRegressor
            | Error::DegenerateChannel(_)
            | Error::NoCyclesFound
            | Error::FewerThanTwoEvents(_)
            | Error::ConstantReference
            | Error::DegenerateNormalizer(_) => 4,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Schema(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
