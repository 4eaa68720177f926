use std::collections::BTreeMap;

use confab::feedback::{
    decode_sequence, viterbi, CueModel, FeatureFrame, FilterState, HmmModel,
};
use confab::Cue;
use confab_oracles::hmm::{batch_forward, exhaustive_viterbi, path_sum_filtered};
use confab_oracles::random;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Puts the same one-dimensional random model on every cue and feeds it
/// through body movement (the only one-feature cue).
fn wrap(model: &CueModel) -> HmmModel {
    let mut cues = BTreeMap::new();
    for cue in Cue::ALL {
        let dims = match cue {
            Cue::EyeContact | Cue::Volume => 2,
            Cue::Smile | Cue::BodyMovement => 1,
        };
        let mut m = model.clone();
        for s in 0..m.initial.len() {
            m.means[s] = vec![model.means[s][0]; dims];
            m.variances[s] = vec![model.variances[s][0]; dims];
        }
        cues.insert(cue, m);
    }
    HmmModel::new(cues).unwrap()
}

fn frames_from(obs: &[Vec<Option<f64>>]) -> Vec<FeatureFrame> {
    obs.iter()
        .enumerate()
        .map(|(t, o)| {
            let mut f = FeatureFrame::neutral(t as u64 * 33 + 5);
            f.movement = o[0].unwrap();
            f
        })
        .collect()
}

#[test]
fn streaming_filter_matches_path_sum_on_three_frames() {
    let model = CueModel {
        initial: vec![0.7, 0.3],
        transition: vec![vec![0.9, 0.1], vec![0.2, 0.8]],
        means: vec![vec![0.0], vec![1.5]],
        variances: vec![vec![0.5], vec![1.0]],
    };
    let obs = vec![vec![Some(0.2)], vec![Some(1.4)], vec![Some(1.9)]];
    let expected = path_sum_filtered(&model, &obs);
    let hmm = wrap(&model);
    let mut state = FilterState::new(&hmm);
    for (f, want) in frames_from(&obs).iter().zip(&expected) {
        state.ingest(&hmm, f).unwrap();
        let got = state.posterior(Cue::BodyMovement);
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-9, "{got:?} vs {want:?}");
        }
    }
}

#[test]
fn streaming_filter_matches_batch_forward_on_random_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..50 {
        let n = 2 + trial % 2;
        let model = random::cue_model(&mut rng, n, 1);
        let obs = random::observations(&mut rng, 200, 1);
        let expected = batch_forward(&model, &obs);
        let hmm = wrap(&model);
        let mut state = FilterState::new(&hmm);
        for (f, want) in frames_from(&obs).iter().zip(&expected) {
            state.ingest(&hmm, f).unwrap();
            let got = state.posterior(Cue::BodyMovement);
            let sum: f64 = got.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
            for (g, w) in got.iter().zip(want) {
                assert!((g - w).abs() < 1e-9, "trial {trial}: {got:?} vs {want:?}");
            }
        }
    }
}

#[test]
fn missing_pitch_matches_marginal_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let model = random::cue_model(&mut rng, 3, 2);
    let obs = random::observations(&mut rng, 60, 2);
    assert!(obs.iter().any(|o| o[1].is_none()));
    let expected = batch_forward(&model, &obs);
    let mut cues = BTreeMap::new();
    for cue in Cue::ALL {
        let m = if cue == Cue::Volume {
            model.clone()
        } else {
            HmmModel::demo().cue(cue).clone()
        };
        cues.insert(cue, m);
    }
    let hmm = HmmModel::new(cues).unwrap();
    let mut state = FilterState::new(&hmm);
    for (t, o) in obs.iter().enumerate() {
        let mut f = FeatureFrame::neutral(t as u64 * 33);
        f.volume_db = o[0].unwrap();
        f.voice_pitch_hz = o[1];
        state.ingest(&hmm, &f).unwrap();
        let got = state.posterior(Cue::Volume);
        for (g, w) in got.iter().zip(&expected[t]) {
            assert!((g - w).abs() < 1e-9);
        }
    }
}

#[test]
fn viterbi_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 1..=3 {
        for len in 1..=8 {
            for _ in 0..20 {
                let model = if n == 1 {
                    CueModel {
                        initial: vec![1.0],
                        transition: vec![vec![1.0]],
                        means: vec![vec![0.0, 0.0]],
                        variances: vec![vec![1.0, 1.0]],
                    }
                } else {
                    random::cue_model(&mut rng, n, 2)
                };
                let obs = random::observations(&mut rng, len, 2);
                assert_eq!(viterbi(&model, &obs), exhaustive_viterbi(&model, &obs));
            }
        }
    }
}

#[test]
fn viterbi_two_state_four_steps() {
    let model = CueModel {
        initial: vec![0.5, 0.5],
        transition: vec![vec![0.8, 0.2], vec![0.3, 0.7]],
        means: vec![vec![0.0], vec![1.0]],
        variances: vec![vec![1.0], vec![1.0]],
    };
    let obs: Vec<_> = [0.1, 0.9, 1.2, -0.3].iter().map(|x| vec![Some(*x)]).collect();
    let expected = exhaustive_viterbi(&model, &obs);
    assert_eq!(viterbi(&model, &obs), expected);
    let decoded = decode_sequence(&wrap(&model), &frames_from(&obs)).unwrap();
    assert_eq!(decoded[&Cue::BodyMovement], expected);
}

#[test]
fn extreme_stream_stays_normalized() {
    let hmm = HmmModel::demo();
    let mut state = FilterState::new(&hmm);
    let extremes = [0.0, 1e6, -1e6, 1e150, -1e300, 1e300, f64::MAX, f64::MIN_POSITIVE];
    for i in 0..(10 * 60 * 30u64) {
        let x = extremes[(i % extremes.len() as u64) as usize];
        let mut f = FeatureFrame::neutral(i * 33 + 1);
        f.head_pitch = x;
        f.smile = -x;
        f.volume_db = x;
        f.voice_pitch_hz = if i % 3 == 0 { None } else { Some(x) };
        f.movement = x.abs();
        state.ingest(&hmm, &f).unwrap();
        for cue in Cue::ALL {
            let p = state.posterior(cue);
            assert!(p.iter().all(|v| v.is_finite() && *v >= 0.0), "{i} {cue} {p:?}");
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9, "{i} {cue} {p:?}");
        }
    }
}

proptest! {
    #[test]
    fn model_file_round_trip_is_byte_identical(seed in any::<u64>(), n in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cues = BTreeMap::new();
        for cue in Cue::ALL {
            let dims = HmmModel::demo().cue(cue).dims();
            cues.insert(cue, random::cue_model(&mut rng, n, dims));
        }
        let model = HmmModel::new(cues).unwrap();
        let text = model.to_text();
        let back = HmmModel::from_text(&text).unwrap();
        prop_assert_eq!(&back, &model);
        prop_assert_eq!(back.to_text(), text);
    }
}
