use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the localization pipeline.
#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid interval [{start}, {end})")]
    InvalidInterval { start: f64, end: f64 },

    #[error("chunk boundary {0} is not on the 2 s grid")]
    OffGrid(f64),

    #[error("class index {class} out of range for a {n_classes}-class scheme")]
    ClassOutOfRange { class: usize, n_classes: usize },

    #[error("chunks and events must not use the no-behavior class 0")]
    NoBehaviorClass,

    #[error("video '{video_id}' is {duration} s long; clips need at least 8 s")]
    VideoTooShort { video_id: String, duration: f64 },

    #[error("event [{start}, {end}) lies outside video '{video_id}' of duration {duration} s")]
    EventOutOfBounds {
        video_id: String,
        start: f64,
        end: f64,
        duration: f64,
    },

    #[error("source clip has {source_frames} frames, fewer than the {target} requested")]
    Upsampling { source_frames: usize, target: usize },

    #[error("frame rate {0} does not give a whole number of frames per 8 s clip")]
    FractionalFrameCount(f64),

    #[error("dimension mismatch: {what} expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("empty {0}")]
    Empty(&'static str),

    #[error("window {index} at {start} s is not on the 8 s / 2 s sliding grid")]
    MisalignedWindow { index: usize, start: f64 },

    #[error("{windows} windows but {scores} score records")]
    Misaligned { windows: usize, scores: usize },

    #[error("inclusion curves need both classes; no {0} samples present")]
    DegenerateLabels(&'static str),

    #[error("ground-truth events of class {class} overlap at {at} s")]
    OverlappingGroundTruth { class: usize, at: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: record {record}: {message}")]
    Parse {
        path: PathBuf,
        record: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
