use std::collections::BTreeMap;

use super::filter::{check_dims, check_frame, relative_to_max, FrameError};
use super::frame::FeatureFrame;
use super::hmm::{CueModel, HmmModel};
use crate::cue::Cue;

/// Most probable state path per cue.
pub fn decode_sequence(
    model: &HmmModel,
    frames: &[FeatureFrame],
) -> Result<BTreeMap<Cue, Vec<usize>>, FrameError> {
    if frames.is_empty() {
        return Err(FrameError::EmptySequence);
    }
    let mut last = None;
    for f in frames {
        check_frame(last, f)?;
        last = Some(f.t_ms);
    }
    let mut paths = BTreeMap::new();
    for (cue, cue_model) in &model.cues {
        let obs: Vec<Vec<Option<f64>>> = frames.iter().map(|f| f.observation(*cue)).collect();
        for o in &obs {
            check_dims(*cue, cue_model, o)?;
        }
        paths.insert(*cue, viterbi(cue_model, &obs));
    }
    Ok(paths)
}

/// Viterbi decoding in log space.
///
/// Among equally probable paths the lexicographically smallest is chosen:
/// a backward pass computes the best achievable continuation from every
/// (time, state), then the path is built front to back taking the lowest
/// state index that attains the optimum.
pub fn viterbi(model: &CueModel, observations: &[Vec<Option<f64>>]) -> Vec<usize> {
    let t_len = observations.len();
    let n = model.states();
    if t_len == 0 {
        return Vec::new();
    }
    let log_a = model.log_transition();
    let log_pi = model.log_initial();
    let emissions: Vec<Vec<f64>> = observations
        .iter()
        .map(|o| relative_to_max(&model.emission_log_likelihoods(o)))
        .collect();

    // best_tail[t][i]: max log-probability of observations t+1.. given state i at t.
    let mut best_tail = vec![vec![0.0; n]; t_len];
    for t in (0..t_len - 1).rev() {
        for i in 0..n {
            best_tail[t][i] = (0..n)
                .map(|j| step_score(&log_a, &emissions, &best_tail, t + 1, i, j))
                .fold(f64::NEG_INFINITY, f64::max);
        }
    }

    let mut path = Vec::with_capacity(t_len);
    let first: Vec<f64> = (0..n)
        .map(|i| log_pi[i] + emissions[0][i] + best_tail[0][i])
        .collect();
    path.push(lowest_argmax(&first));
    for t in 1..t_len {
        let prev = path[t - 1];
        let scores: Vec<f64> = (0..n)
            .map(|j| step_score(&log_a, &emissions, &best_tail, t, prev, j))
            .collect();
        path.push(lowest_argmax(&scores));
    }
    path
}

fn step_score(
    log_a: &[Vec<f64>],
    emissions: &[Vec<f64>],
    best_tail: &[Vec<f64>],
    t: usize,
    from: usize,
    to: usize,
) -> f64 {
    log_a[from][to] + emissions[t][to] + best_tail[t][to]
}

fn lowest_argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate().skip(1) {
        if *s > scores[best] {
            best = i;
        }
    }
    best
}
