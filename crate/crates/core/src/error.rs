use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("{0}: trace contains no samples")]
    EmptySeries(PathBuf),

    #[error("slot duration {target}s is not an integer multiple of native resolution {native}s")]
    ResolutionMismatch { native: f64, target: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("not enough data: need {needed} samples, got {got}")]
    NotEnoughData { needed: usize, got: usize },

    #[error("rate level {0} Mbit/s is not one of the configured levels")]
    InvalidLevel(f64),

    #[error("link rates sum to {total} bit/s, above the {max} bit/s intra-server limit")]
    InfeasibleRate { total: f64, max: f64 },

    #[error("workload of {gamma} bits cannot be split over {containers} containers capped at {cap} bits")]
    InfeasibleAllocation { gamma: u64, containers: usize, cap: u64 },

    #[error("infeasible control: {0}")]
    InfeasibleControl(String),

    #[error("site energy {demand} J exceeds stored energy {available} J")]
    EnergyViolation { demand: f64, available: f64 },

    #[error("{buffer} backlog of {backlog} bits exceeds its {cap} bit capacity")]
    BufferOverflow { buffer: &'static str, backlog: u64, cap: u64 },

    #[error("invariant violated at slot {slot}: {msg}")]
    Invariant { slot: usize, msg: String },

    #[error("configuration error in `{field}`: {msg}")]
    Config { field: String, msg: String },

    #[error("configuration is infeasible: {0}")]
    Infeasible(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(field: &str, msg: impl Into<String>) -> Self {
        Error::Config { field: field.to_string(), msg: msg.into() }
    }
}
