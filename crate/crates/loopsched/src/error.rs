//! Crate-wide error type.

use crate::workload::KernelError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid technique configuration: {0}")]
    InvalidTechnique(String),
    #[error("invalid loop: {0}")]
    InvalidLoop(String),
    #[error("invalid platform: {0}")]
    InvalidPlatform(String),
    #[error("invalid cost model: {0}")]
    InvalidCost(String),
    #[error("invalid workload: {0}")]
    InvalidWorkload(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    /// A workload kernel failed while executing a chunk; the owning chunk is
    /// identified so the failure can be traced back to a scheduling decision.
    #[error("kernel failure in chunk (pe {pe}, step {step}, start {start}, size {size}): {source}")]
    Kernel {
        pe: usize,
        step: u64,
        start: u64,
        size: u64,
        #[source]
        source: KernelError,
    },
    #[error("no progress in two-sided runtime: {0}")]
    Deadlock(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("config file: {0}")]
    Toml(#[from] toml::de::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than a runtime failure.
    /// The CLI maps these to exit code 2, everything else to 1.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidTechnique(_)
                | Error::InvalidLoop(_)
                | Error::InvalidPlatform(_)
                | Error::InvalidCost(_)
                | Error::InvalidWorkload(_)
                | Error::InvalidSchedule(_)
                | Error::InvalidConfig(_)
                | Error::Toml(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
