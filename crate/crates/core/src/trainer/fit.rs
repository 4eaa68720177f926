use std::collections::BTreeMap;

use super::marks::LabelTrack;
use super::TrainError;
use crate::cue::Cue;
use crate::feedback::{CueModel, FeatureFrame, HmmModel, DEFAULT_VARIANCE_FLOOR};

/// A recorded stretch of frames with a 0/1 label per frame and cue.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSequence {
    pub frames: Vec<FeatureFrame>,
    pub labels: BTreeMap<Cue, Vec<u8>>,
}

impl LabeledSequence {
    /// Labels each frame with the label of the bin it falls in.
    pub fn from_track(frames: Vec<FeatureFrame>, track: &LabelTrack) -> Result<Self, TrainError> {
        let mut labels = BTreeMap::new();
        for cue in Cue::ALL {
            let per_frame: Option<Vec<u8>> =
                frames.iter().map(|f| track.label_at(cue, f.t_ms)).collect();
            let per_frame = per_frame.ok_or(TrainError::MisalignedLengths {
                cue,
                frames: frames.len(),
                labels: track.bins(),
            })?;
            labels.insert(cue, per_frame);
        }
        Ok(LabeledSequence { frames, labels })
    }
}

/// Initial distribution and transition matrix from label sequences, both
/// with add-one smoothing. Works even when a state never occurs.
pub fn estimate_transitions(sequences: &[&[u8]], states: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut starts = vec![1.0; states];
    let mut counts = vec![vec![1.0; states]; states];
    for seq in sequences {
        if let Some(&first) = seq.first() {
            starts[first as usize] += 1.0;
        }
        for w in seq.windows(2) {
            counts[w[0] as usize][w[1] as usize] += 1.0;
        }
    }
    let normalize = |row: &mut Vec<f64>| {
        let z: f64 = row.iter().sum();
        row.iter_mut().for_each(|x| *x /= z);
    };
    normalize(&mut starts);
    counts.iter_mut().for_each(normalize);
    (starts, counts)
}

/// Supervised maximum-likelihood fit of a two-state model per cue.
pub fn fit_supervised(
    sequences: &[LabeledSequence],
    variance_floor: f64,
) -> Result<HmmModel, TrainError> {
    let mut cues = BTreeMap::new();
    for cue in Cue::ALL {
        cues.insert(cue, fit_cue(cue, sequences, variance_floor)?);
    }
    Ok(HmmModel::with_variance_floor(cues, variance_floor)?)
}

/// [`fit_supervised`] with the default variance floor.
pub fn fit(sequences: &[LabeledSequence]) -> Result<HmmModel, TrainError> {
    fit_supervised(sequences, DEFAULT_VARIANCE_FLOOR)
}

fn fit_cue(
    cue: Cue,
    sequences: &[LabeledSequence],
    variance_floor: f64,
) -> Result<CueModel, TrainError> {
    const STATES: usize = 2;
    let mut label_seqs: Vec<&[u8]> = Vec::with_capacity(sequences.len());
    let mut dims = None;
    // Per state and dimension: (count, sum, sum of squares) of present values.
    let mut stats: Vec<Vec<(f64, f64, f64)>> = Vec::new();
    let mut class_seen = [false; STATES];

    for seq in sequences {
        let labels = seq
            .labels
            .get(&cue)
            .ok_or(TrainError::MissingLabels(cue))?;
        if labels.len() != seq.frames.len() {
            return Err(TrainError::MisalignedLengths {
                cue,
                frames: seq.frames.len(),
                labels: labels.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|l| **l as usize >= STATES) {
            return Err(TrainError::BadLabel { cue, label: bad });
        }
        label_seqs.push(labels);
        for (frame, &label) in seq.frames.iter().zip(labels) {
            if let Some(field) = frame.non_finite_field() {
                return Err(TrainError::NonFiniteFeature {
                    t_ms: frame.t_ms,
                    field,
                });
            }
            let obs = frame.observation(cue);
            let d = *dims.get_or_insert(obs.len());
            if obs.len() != d {
                return Err(TrainError::DimensionMismatch {
                    cue,
                    expected: d,
                    got: obs.len(),
                });
            }
            if stats.is_empty() {
                stats = vec![vec![(0.0, 0.0, 0.0); d]; STATES];
            }
            class_seen[label as usize] = true;
            for (acc, x) in stats[label as usize].iter_mut().zip(&obs) {
                if let Some(x) = x {
                    acc.0 += 1.0;
                    acc.1 += x;
                    acc.2 += x * x;
                }
            }
        }
    }
    for (class, seen) in class_seen.iter().enumerate() {
        if !seen {
            return Err(TrainError::MissingClass {
                cue,
                class: class as u8,
            });
        }
    }

    let (initial, transition) = estimate_transitions(&label_seqs, STATES);
    let d = dims.unwrap_or(0);
    let mut means = vec![vec![0.0; d]; STATES];
    let mut variances = vec![vec![1.0; d]; STATES];
    for dim in 0..d {
        let pooled = stats.iter().fold((0.0, 0.0, 0.0), |a, s| {
            (a.0 + s[dim].0, a.1 + s[dim].1, a.2 + s[dim].2)
        });
        for state in 0..STATES {
            // A dimension never observed in this state borrows the pooled
            // statistics; one never observed at all keeps N(0, 1).
            let (n, sum, sq) = if stats[state][dim].0 > 0.0 {
                stats[state][dim]
            } else {
                pooled
            };
            if n > 0.0 {
                let mean = sum / n;
                means[state][dim] = mean;
                variances[state][dim] = (sq / n - mean * mean).max(variance_floor);
            }
        }
    }
    Ok(CueModel {
        initial,
        transition,
        means,
        variances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_zero_labels_favor_staying_in_state_zero() {
        let labels = vec![0u8; 100];
        let (initial, a) = estimate_transitions(&[&labels], 2);
        // 99 observed 0->0 transitions plus one pseudo-count per cell.
        assert_eq!(a[0], vec![100.0 / 101.0, 1.0 / 101.0]);
        assert_eq!(a[1], vec![0.5, 0.5]);
        assert_eq!(initial, vec![2.0 / 3.0, 1.0 / 3.0]);
    }

    fn sequence(labels: Vec<u8>) -> LabeledSequence {
        let frames = labels
            .iter()
            .enumerate()
            .map(|(t, l)| {
                let mut f = FeatureFrame::neutral(t as u64 * 100);
                f.smile = if *l == 1 { 0.1 } else { 1.0 } + (t % 3) as f64 * 0.01;
                f
            })
            .collect();
        let mut map = BTreeMap::new();
        for cue in Cue::ALL {
            map.insert(cue, labels.clone());
        }
        LabeledSequence { frames, labels: map }
    }

    #[test]
    fn missing_class_is_an_error() {
        let seq = sequence(vec![0; 20]);
        assert!(matches!(
            fit(&[seq]),
            Err(TrainError::MissingClass { class: 1, .. })
        ));
    }

    #[test]
    fn misaligned_lengths_rejected() {
        let mut seq = sequence(vec![0, 1, 0, 1]);
        seq.labels.get_mut(&Cue::Volume).unwrap().pop();
        assert!(matches!(
            fit(&[seq]),
            Err(TrainError::MisalignedLengths { cue: Cue::Volume, .. })
        ));
    }

    #[test]
    fn fitted_model_is_valid_with_floored_variances() {
        // Constant features give zero sample variance, which must be floored.
        let seq = sequence(vec![0, 0, 1, 1, 0, 1]);
        let model = fit(&[seq]).unwrap();
        model.validate().unwrap();
        let eye = model.cue(Cue::EyeContact);
        assert_eq!(eye.variances[0][0], DEFAULT_VARIANCE_FLOOR);
        let smile = model.cue(Cue::Smile);
        assert!(smile.means[1][0] < 0.2 && smile.means[0][0] > 0.9);
    }

    #[test]
    fn unobserved_dimension_uses_pooled_stats() {
        let mut seq = sequence(vec![0, 1, 0, 1]);
        for (i, f) in seq.frames.iter_mut().enumerate() {
            f.voice_pitch_hz = if i % 2 == 0 { Some(100.0 + i as f64) } else { None };
        }
        let model = fit(&[seq]).unwrap();
        let vol = model.cue(Cue::Volume);
        assert_eq!(vol.means[0][1], 101.0);
        assert_eq!(vol.means[1][1], 101.0);
    }
}
