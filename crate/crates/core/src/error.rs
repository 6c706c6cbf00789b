use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    #[error("invalid bounding box: {0}")]
    InvalidBox(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    #[error("transform length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("channel mismatch: model has {model}, sample has {sample}")]
    ChannelMismatch { model: usize, sample: usize },

    #[error("feature map has no channels")]
    NoChannels,

    #[error("invalid batch schedule: {0}")]
    InvalidSchedule(String),

    #[error("cannot fit {channels} channels into {batches} batches of {lanes} lanes")]
    InfeasibleBatches {
        channels: usize,
        batches: usize,
        lanes: usize,
    },

    #[error("invalid scale pyramid: {0}")]
    InvalidPyramid(String),

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("malformed ground-truth line {line:?}: {reason}")]
    MalformedTruth { line: String, reason: String },

    #[error("ground truth has {truth} boxes but sequence has {frames} frames")]
    TruthCountMismatch { truth: usize, frames: usize },

    #[error("target leaves the frame at frame {0}")]
    TargetOutOfFrame(usize),

    #[error("malformed config line {line}: {reason}")]
    Config { line: usize, reason: String },

    #[error("malformed results csv line {line}: {reason}")]
    ResultsCsv { line: usize, reason: String },

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors caused by bad user input, as opposed to a broken internal invariant.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::NonFinite(_)
                | Error::DimensionMismatch { .. }
                | Error::ChannelMismatch { .. }
                | Error::NoChannels
        )
    }
}
