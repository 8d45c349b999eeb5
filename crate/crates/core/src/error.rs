use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the augmentation engine, the metrics, and the
/// toy trainer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("invalid value: {0}")]
    InvalidValue(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid strength: {0}")]
    InvalidStrength(String),
    #[error("operation not applicable: {0}")]
    NotApplicable(String),
    #[error("spatial diversity {requested} exceeds the {available} distinct parameter sets available")]
    DiversityTooLarge { requested: u64, available: u64 },
    #[error("transform has finite spatial diversity but no pre-sampled parameter sets")]
    NotPresampled,
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("step counter overflow")]
    CounterOverflow,
    #[error("degenerate denominator: mean augmented return is zero")]
    DegenerateDenominator,
    #[error("degenerate variance: correlation is undefined")]
    DegenerateVariance,
    #[error("training diverged (non-finite loss) at update {0}")]
    DivergedAtStep(u64),
    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
