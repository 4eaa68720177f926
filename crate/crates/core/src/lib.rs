pub mod analytics;
pub mod cue;
pub mod dialogue;
pub mod feedback;
pub mod synth;
pub mod trainer;
pub mod transduction;

pub use cue::Cue;
