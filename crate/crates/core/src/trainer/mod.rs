//! Feedback-model training from multi-rater annotations: binning,
//! majority aggregation, inter-rater agreement and supervised HMM fitting.

mod alpha;
mod fit;
mod io;
mod marks;

use thiserror::Error;

use crate::cue::Cue;
use crate::feedback::ModelError;

pub use alpha::{agreement, krippendorff_alpha, AgreementReport};
pub use fit::{estimate_transitions, fit, fit_supervised, LabeledSequence};
pub use io::{parse_frame_file, parse_label_file, raters_in, write_frame_file};
pub use marks::{
    aggregate_labels, bin_marks, LabelTrack, MarkMatrix, RawMark, DEFAULT_BIN_MS,
    DEFAULT_MIN_RATERS,
};

#[derive(Debug, Error, PartialEq)]
pub enum TrainError {
    #[error("mark [{start_ms}, {end_ms}) by {rater} is outside the {span_ms} ms span")]
    IntervalOutOfSpan {
        rater: String,
        start_ms: u64,
        end_ms: u64,
        span_ms: u64,
    },
    #[error("bin size must be positive")]
    ZeroBinSize,
    #[error("need at least 2 raters, found {0}")]
    TooFewRaters(usize),
    #[error("threshold {threshold} exceeds the {raters} raters")]
    ThresholdExceedsRaters { threshold: usize, raters: usize },
    #[error("no unit has two or more ratings")]
    InsufficientData,
    #[error("{cue}: no frames labelled {class}")]
    MissingClass { cue: Cue, class: u8 },
    #[error("{cue}: {frames} frames but {labels} labels")]
    MisalignedLengths {
        cue: Cue,
        frames: usize,
        labels: usize,
    },
    #[error("{0}: no labels supplied")]
    MissingLabels(Cue),
    #[error("{cue}: label {label} is not 0 or 1")]
    BadLabel { cue: Cue, label: u8 },
    #[error("{cue}: observation has {got} features, expected {expected}")]
    DimensionMismatch {
        cue: Cue,
        expected: usize,
        got: usize,
    },
    #[error("frame at {t_ms} ms has non-finite {field}")]
    NonFiniteFeature { t_ms: u64, field: &'static str },
    #[error("label file line {line}: {message}")]
    LabelFile { line: usize, message: String },
    #[error("frame file line {line}: {message}")]
    FrameFile { line: usize, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}
