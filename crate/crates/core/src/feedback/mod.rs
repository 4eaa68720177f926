//! Real-time nonverbal feedback: per-cue HMM forward filtering, Viterbi
//! decoding for offline evaluation, and the green / flashing-red icon
//! machine with positive acknowledgments.

mod ack;
mod filter;
mod frame;
mod hmm;
mod icons;
mod viterbi;

pub use ack::{emit_positive_ack, AckPolicy, AckTracker, Acknowledgment};
pub use filter::{ingest_frame, FilterState, FrameError};
pub use frame::FeatureFrame;
pub use hmm::{CueModel, HmmModel, ModelError, DEFAULT_VARIANCE_FLOOR, MODEL_FORMAT};
pub use icons::{decide_icons, CueIcon, EventKind, FeedbackEvent, IconColor, IconPolicy, IconState};
pub use viterbi::{decode_sequence, viterbi};
