//! Synthetic feature streams sampled from a known model, standing in for
//! camera and microphone feature extraction.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::cue::Cue;
use crate::feedback::{CueModel, FeatureFrame, HmmModel};

/// Frames sampled from `model` together with the hidden states that
/// produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledStream {
    pub frames: Vec<FeatureFrame>,
    pub states: BTreeMap<Cue, Vec<usize>>,
}

fn sample_index<R: Rng>(rng: &mut R, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Markov chain of `steps` states from the model's initial distribution
/// and transition matrix.
pub fn sample_states<R: Rng>(rng: &mut R, model: &CueModel, steps: usize) -> Vec<usize> {
    let mut states = Vec::with_capacity(steps);
    for t in 0..steps {
        let s = if t == 0 {
            sample_index(rng, &model.initial)
        } else {
            let prev: usize = states[t - 1];
            sample_index(rng, &model.transition[prev])
        };
        states.push(s);
    }
    states
}

/// One observation vector from a state's diagonal Gaussian.
pub fn sample_observation<R: Rng>(rng: &mut R, model: &CueModel, state: usize) -> Vec<f64> {
    model.means[state]
        .iter()
        .zip(&model.variances[state])
        .map(|(m, v)| Normal::new(*m, v.sqrt()).expect("valid variance").sample(rng))
        .collect()
}

/// Writes a cue's observation vector back into the frame fields it is read
/// from (the inverse of [`FeatureFrame::observation`]).
pub fn apply_observation(frame: &mut FeatureFrame, cue: Cue, obs: &[f64]) {
    match cue {
        Cue::EyeContact => {
            frame.head_pitch = obs[0];
            frame.head_yaw = obs[1];
        }
        Cue::Smile => {
            frame.smile = obs[0];
            frame.action_units = obs[1..].to_vec();
        }
        Cue::Volume => {
            frame.volume_db = obs[0];
            frame.voice_pitch_hz = Some(obs[1]);
        }
        Cue::BodyMovement => frame.movement = obs[0],
    }
}

/// Samples `steps` frames, `frame_ms` apart, every cue evolving
/// independently under its own chain.
pub fn sample_stream<R: Rng>(
    rng: &mut R,
    model: &HmmModel,
    steps: usize,
    frame_ms: u64,
) -> SampledStream {
    let mut frames: Vec<FeatureFrame> = (0..steps)
        .map(|t| FeatureFrame::neutral(t as u64 * frame_ms))
        .collect();
    let mut states = BTreeMap::new();
    for (cue, cue_model) in &model.cues {
        let path = sample_states(rng, cue_model, steps);
        for (frame, &s) in frames.iter_mut().zip(&path) {
            let obs = sample_observation(rng, cue_model, s);
            apply_observation(frame, *cue, &obs);
        }
        states.insert(*cue, path);
    }
    SampledStream { frames, states }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn stream_is_deterministic_and_well_formed() {
        let model = HmmModel::demo();
        let a = sample_stream(&mut ChaCha8Rng::seed_from_u64(1), &model, 50, 33);
        let b = sample_stream(&mut ChaCha8Rng::seed_from_u64(1), &model, 50, 33);
        assert_eq!(a, b);
        assert!(a.frames.windows(2).all(|w| w[0].t_ms < w[1].t_ms));
        for cue in Cue::ALL {
            assert_eq!(a.states[&cue].len(), 50);
            for f in &a.frames {
                assert_eq!(f.observation(cue).len(), model.cue(cue).dims());
            }
        }
    }

    #[test]
    fn apply_then_observe_round_trips() {
        let mut f = FeatureFrame::neutral(0);
        apply_observation(&mut f, Cue::Volume, &[55.0, 210.0]);
        assert_eq!(f.observation(Cue::Volume), vec![Some(55.0), Some(210.0)]);
    }
}
