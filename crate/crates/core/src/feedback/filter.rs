use std::collections::BTreeMap;

use thiserror::Error;

use super::frame::FeatureFrame;
use super::hmm::{CueModel, HmmModel};
use crate::cue::Cue;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrameError {
    #[error("frame at {got} ms does not follow previous frame at {previous} ms")]
    NonMonotonicTimestamp { previous: u64, got: u64 },
    #[error("frame at {t_ms} ms has non-finite {field}")]
    NonFiniteFeature { t_ms: u64, field: &'static str },
    #[error("{cue} observation has {got} features, model expects {expected}")]
    DimensionMismatch {
        cue: Cue,
        expected: usize,
        got: usize,
    },
    #[error("cannot decode an empty frame sequence")]
    EmptySequence,
}

/// Online posterior over each cue's hidden states, kept in log space.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    log_posterior: BTreeMap<Cue, Vec<f64>>,
    last_t_ms: Option<u64>,
}

impl FilterState {
    /// Starts every cue at its initial distribution. The first ingested
    /// frame updates that distribution directly, without a transition.
    pub fn new(model: &HmmModel) -> Self {
        let log_posterior = model
            .cues
            .iter()
            .map(|(cue, m)| (*cue, m.log_initial()))
            .collect();
        FilterState {
            log_posterior,
            last_t_ms: None,
        }
    }

    pub fn last_t_ms(&self) -> Option<u64> {
        self.last_t_ms
    }

    pub fn posterior(&self, cue: Cue) -> Vec<f64> {
        self.log_posterior[&cue].iter().map(|l| l.exp()).collect()
    }

    /// Probability mass on the needs-feedback states (every state but 0).
    pub fn needs_feedback(&self, cue: Cue) -> f64 {
        let lp = &self.log_posterior[&cue];
        let rest = log_sum_exp(&lp[1..]);
        rest.exp().clamp(0.0, 1.0)
    }

    /// Advances the filter by one frame.
    pub fn ingest(&mut self, model: &HmmModel, frame: &FeatureFrame) -> Result<(), FrameError> {
        check_frame(self.last_t_ms, frame)?;
        let mut next = BTreeMap::new();
        for (cue, cue_model) in &model.cues {
            let obs = frame.observation(*cue);
            check_dims(*cue, cue_model, &obs)?;
            let prior = &self.log_posterior[cue];
            let predicted = if self.last_t_ms.is_some() {
                predict(cue_model, prior)
            } else {
                prior.clone()
            };
            let emission = cue_model.emission_log_likelihoods(&obs);
            next.insert(*cue, update(&predicted, &emission));
        }
        self.log_posterior = next;
        self.last_t_ms = Some(frame.t_ms);
        Ok(())
    }
}

/// Functional form of [`FilterState::ingest`].
pub fn ingest_frame(
    state: &FilterState,
    model: &HmmModel,
    frame: &FeatureFrame,
) -> Result<FilterState, FrameError> {
    let mut next = state.clone();
    next.ingest(model, frame)?;
    Ok(next)
}

pub(crate) fn check_frame(last: Option<u64>, frame: &FeatureFrame) -> Result<(), FrameError> {
    if let Some(previous) = last {
        if frame.t_ms <= previous {
            return Err(FrameError::NonMonotonicTimestamp {
                previous,
                got: frame.t_ms,
            });
        }
    }
    if let Some(field) = frame.non_finite_field() {
        return Err(FrameError::NonFiniteFeature {
            t_ms: frame.t_ms,
            field,
        });
    }
    Ok(())
}

pub(crate) fn check_dims(cue: Cue, model: &CueModel, obs: &[Option<f64>]) -> Result<(), FrameError> {
    if obs.len() != model.dims() {
        return Err(FrameError::DimensionMismatch {
            cue,
            expected: model.dims(),
            got: obs.len(),
        });
    }
    Ok(())
}

/// log(Aᵀ · p) for a log-space distribution p.
fn predict(model: &CueModel, log_prior: &[f64]) -> Vec<f64> {
    let log_a = model.log_transition();
    let n = log_prior.len();
    let mut terms = vec![0.0; n];
    (0..n)
        .map(|j| {
            for i in 0..n {
                terms[i] = log_prior[i] + log_a[i][j];
            }
            log_sum_exp(&terms)
        })
        .collect()
}

fn update(log_predicted: &[f64], log_emission: &[f64]) -> Vec<f64> {
    let log_emission = relative_to_max(log_emission);
    let joint: Vec<f64> = log_predicted
        .iter()
        .zip(&log_emission)
        .map(|(p, e)| p + e)
        .collect();
    let norm = log_sum_exp(&joint);
    if norm.is_finite() {
        joint.iter().map(|j| j - norm).collect()
    } else {
        // Observation impossible under every reachable state; keep the prediction.
        let norm = log_sum_exp(log_predicted);
        log_predicted.iter().map(|p| p - norm).collect()
    }
}

/// Shifts log-likelihoods so the largest is 0. Extreme observations give
/// values near -1e300 whose sum with a log prior would lose the prior
/// entirely; the shift is a per-frame constant, so posteriors and argmaxes
/// are unchanged.
pub(crate) fn relative_to_max(xs: &[f64]) -> Vec<f64> {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_finite() {
        xs.iter().map(|x| x - max).collect()
    } else {
        xs.to_vec()
    }
}

pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn symmetric_model() -> HmmModel {
        let mut model = HmmModel::demo();
        for m in model.cues.values_mut() {
            let n = m.states();
            m.transition = vec![vec![1.0 / n as f64; n]; n];
            let (mean, var) = (m.means[0].clone(), m.variances[0].clone());
            m.means = vec![mean; n];
            m.variances = vec![var; n];
        }
        model.validate().unwrap();
        model
    }

    #[test]
    fn symmetric_model_leaves_uniform_posterior() {
        let mut model = symmetric_model();
        for m in model.cues.values_mut() {
            m.initial = vec![0.5, 0.5];
        }
        let mut state = FilterState::new(&model);
        for t in 0..5 {
            let mut f = FeatureFrame::neutral(t * 33);
            f.smile = t as f64;
            state.ingest(&model, &f).unwrap();
            for cue in Cue::ALL {
                let p = state.posterior(cue);
                assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn nan_volume_rejected() {
        let model = HmmModel::demo();
        let state = FilterState::new(&model);
        let mut f = FeatureFrame::neutral(0);
        f.volume_db = f64::NAN;
        assert_eq!(
            ingest_frame(&state, &model, &f),
            Err(FrameError::NonFiniteFeature {
                t_ms: 0,
                field: "volume_db"
            })
        );
    }

    #[test]
    fn timestamps_must_increase() {
        let model = HmmModel::demo();
        let mut state = FilterState::new(&model);
        state.ingest(&model, &FeatureFrame::neutral(100)).unwrap();
        let err = state.ingest(&model, &FeatureFrame::neutral(100)).unwrap_err();
        assert_eq!(
            err,
            FrameError::NonMonotonicTimestamp {
                previous: 100,
                got: 100
            }
        );
        assert_eq!(state.last_t_ms(), Some(100));
    }

    #[test]
    fn frown_raises_smile_need() {
        let model = HmmModel::demo();
        let mut state = FilterState::new(&model);
        let mut t = 0;
        for _ in 0..30 {
            t += 33;
            state.ingest(&model, &FeatureFrame::neutral(t)).unwrap();
        }
        assert!(state.needs_feedback(Cue::Smile) < 0.05);
        for _ in 0..30 {
            t += 33;
            let mut f = FeatureFrame::neutral(t);
            f.smile = 0.0;
            state.ingest(&model, &f).unwrap();
        }
        assert!(state.needs_feedback(Cue::Smile) > 0.95);
        assert!(state.needs_feedback(Cue::EyeContact) < 0.05);
    }

    #[test]
    fn action_unit_dimension_checked() {
        let model = HmmModel::demo();
        let mut state = FilterState::new(&model);
        let mut f = FeatureFrame::neutral(0);
        f.action_units = vec![0.3];
        assert!(matches!(
            state.ingest(&model, &f),
            Err(FrameError::DimensionMismatch { cue: Cue::Smile, .. })
        ));
    }

    #[test]
    fn log_sum_exp_handles_infinities() {
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY; 3]), f64::NEG_INFINITY);
        assert!((log_sum_exp(&[0.0, 0.0]) - 2f64.ln()).abs() < 1e-15);
        assert!((log_sum_exp(&[-1000.0, -1000.0]) - (-1000.0 + 2f64.ln())).abs() < 1e-12);
    }
}
