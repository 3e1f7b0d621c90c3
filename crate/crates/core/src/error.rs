use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input file not found: {0}")]
    MissingFile(PathBuf),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error("all {0} rows were rejected (non-finite values)")]
    AllRowsRejected(usize),
    #[error("malformed {format} file: {reason}")]
    Format { format: &'static str, reason: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("k = {k} out of range for {n} points")]
    KOutOfRange { k: usize, n: usize },
    #[error("steepest links contain a cycle through vertex {0}")]
    LinkCycle(usize),
    #[error("cube configuration mismatch")]
    CubeConfigMismatch,
    #[error("axis pair ({0}, {1}) is not stored in the cube set")]
    MissingPair(usize, usize),
    #[error("unknown axis: {0}")]
    UnknownAxis(String),
    #[error("threshold {t} is below the leaf level {t_base}; rebuild the cubes")]
    BelowLeafThreshold { t: f64, t_base: f64 },
    #[error("segment {0} does not exist at this threshold")]
    UnknownSegment(usize),
    #[error("selection computed at t = {selection} but contours at t = {contours}")]
    ThresholdMismatch { selection: f64, contours: f64 },
}

impl Error {
    pub(crate) fn format(format: &'static str, reason: impl Into<String>) -> Self {
        Error::Format {
            format,
            reason: reason.into(),
        }
    }
}
