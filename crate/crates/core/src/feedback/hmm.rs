use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cue::Cue;

pub const MODEL_FORMAT: &str = "confab-hmm/1";
pub const DEFAULT_VARIANCE_FLOOR: f64 = 1e-4;
const STOCHASTIC_TOLERANCE: f64 = 1e-9;

/// Hidden-state model for one cue. State 0 is "acceptable", state 1
/// "needs feedback"; any further states also count as needing feedback.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CueModel {
    pub initial: Vec<f64>,
    pub transition: Vec<Vec<f64>>,
    /// Per-state diagonal Gaussian means, one entry per observed feature.
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("{cue}: {message}")]
    Invalid { cue: Cue, message: String },
    #[error("model has no entry for cue {0}")]
    MissingCue(Cue),
    #[error("unsupported model format {0:?}")]
    UnsupportedFormat(String),
    #[error("model file: {0}")]
    Parse(String),
    #[error("model file {path}: {message}")]
    Io { path: String, message: String },
}

impl CueModel {
    pub fn states(&self) -> usize {
        self.initial.len()
    }

    pub fn dims(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    pub fn validate(&self, cue: Cue, variance_floor: f64) -> Result<(), ModelError> {
        let bad = |message: String| Err(ModelError::Invalid { cue, message });
        let n = self.states();
        if n < 2 {
            return bad(format!("needs at least 2 states, has {n}"));
        }
        if self.transition.len() != n || self.means.len() != n || self.variances.len() != n {
            return bad("state count differs between parameters".into());
        }
        check_distribution(&self.initial).or_else(|m| bad(format!("initial distribution {m}")))?;
        for (i, row) in self.transition.iter().enumerate() {
            if row.len() != n {
                return bad(format!("transition row {i} has {} entries", row.len()));
            }
            check_distribution(row).or_else(|m| bad(format!("transition row {i} {m}")))?;
        }
        let d = self.dims();
        if d == 0 {
            return bad("emission has no dimensions".into());
        }
        for i in 0..n {
            if self.means[i].len() != d || self.variances[i].len() != d {
                return bad(format!("state {i} emission dimension mismatch"));
            }
            if self.means[i].iter().any(|m| !m.is_finite()) {
                return bad(format!("state {i} has a non-finite mean"));
            }
            if let Some(v) = self.variances[i]
                .iter()
                .find(|v| !v.is_finite() || **v < variance_floor)
            {
                return bad(format!("state {i} variance {v} below floor {variance_floor}"));
            }
        }
        Ok(())
    }

    /// Log-likelihood of an observation under each state. Missing
    /// dimensions contribute nothing. If every state underflows to
    /// `-inf` the observation carries no usable information and all
    /// states get 0.
    pub fn emission_log_likelihoods(&self, obs: &[Option<f64>]) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .means
            .iter()
            .zip(&self.variances)
            .map(|(means, vars)| {
                obs.iter()
                    .zip(means.iter().zip(vars))
                    .filter_map(|(x, (m, v))| x.map(|x| gaussian_log_pdf(x, *m, *v)))
                    .sum::<f64>()
            })
            .collect();
        if out.iter().all(|l| *l == f64::NEG_INFINITY || l.is_nan()) {
            out.iter_mut().for_each(|l| *l = 0.0);
        }
        out
    }

    pub fn log_initial(&self) -> Vec<f64> {
        self.initial.iter().map(|p| p.ln()).collect()
    }

    pub fn log_transition(&self) -> Vec<Vec<f64>> {
        self.transition
            .iter()
            .map(|row| row.iter().map(|p| p.ln()).collect())
            .collect()
    }
}

fn check_distribution(p: &[f64]) -> Result<(), String> {
    if p.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err("has a negative or non-finite entry".into());
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > STOCHASTIC_TOLERANCE {
        return Err(format!("sums to {sum}"));
    }
    Ok(())
}

pub(crate) fn gaussian_log_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let z = (x - mean) / var.sqrt();
    -0.5 * ((2.0 * PI * var).ln() + z * z)
}

/// The per-cue feedback models plus the variance floor they were built
/// with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HmmModel {
    pub format: String,
    pub variance_floor: f64,
    pub cues: BTreeMap<Cue, CueModel>,
}

impl HmmModel {
    pub fn new(cues: BTreeMap<Cue, CueModel>) -> Result<Self, ModelError> {
        Self::with_variance_floor(cues, DEFAULT_VARIANCE_FLOOR)
    }

    pub fn with_variance_floor(
        cues: BTreeMap<Cue, CueModel>,
        variance_floor: f64,
    ) -> Result<Self, ModelError> {
        let model = HmmModel {
            format: MODEL_FORMAT.to_string(),
            variance_floor,
            cues,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.format != MODEL_FORMAT {
            return Err(ModelError::UnsupportedFormat(self.format.clone()));
        }
        for cue in Cue::ALL {
            self.cues
                .get(&cue)
                .ok_or(ModelError::MissingCue(cue))?
                .validate(cue, self.variance_floor)?;
        }
        Ok(())
    }

    pub fn cue(&self, cue: Cue) -> &CueModel {
        &self.cues[&cue]
    }

    /// Serializes to the model file format. Writing a model read back from
    /// this output reproduces it byte for byte.
    pub fn to_text(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model is always serializable");
        s.push('\n');
        s
    }

    pub fn from_text(text: &str) -> Result<Self, ModelError> {
        let probe: serde_json::Value =
            serde_json::from_str(text).map_err(|e| ModelError::Parse(e.to_string()))?;
        match probe.get("format").and_then(|f| f.as_str()) {
            Some(MODEL_FORMAT) => {}
            Some(other) => return Err(ModelError::UnsupportedFormat(other.to_string())),
            None => return Err(ModelError::Parse("missing format tag".into())),
        }
        let model: HmmModel =
            serde_json::from_value(probe).map_err(|e| ModelError::Parse(e.to_string()))?;
        model.validate()?;
        Ok(model)
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path).map_err(|e| ModelError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_text(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        std::fs::write(path, self.to_text()).map_err(|e| ModelError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    /// Hand-set model used when no trained model is supplied. Each cue has
    /// two sticky states with well separated emissions.
    pub fn demo() -> Self {
        let sticky = |stay: f64| vec![vec![stay, 1.0 - stay], vec![1.0 - stay, stay]];
        let cue = |ok: Vec<f64>, bad: Vec<f64>, ok_var: Vec<f64>, bad_var: Vec<f64>| CueModel {
            initial: vec![0.9, 0.1],
            transition: sticky(0.97),
            means: vec![ok, bad],
            variances: vec![ok_var, bad_var],
        };
        let mut cues = BTreeMap::new();
        cues.insert(
            Cue::EyeContact,
            cue(vec![0.0, 0.0], vec![-25.0, 0.0], vec![64.0, 100.0], vec![64.0, 400.0]),
        );
        cues.insert(Cue::Smile, cue(vec![1.0], vec![0.1], vec![0.09], vec![0.04]));
        cues.insert(
            Cue::Volume,
            cue(vec![60.0, 180.0], vec![42.0, 180.0], vec![16.0, 900.0], vec![16.0, 900.0]),
        );
        cues.insert(Cue::BodyMovement, cue(vec![0.1], vec![0.8], vec![0.01], vec![0.04]));
        HmmModel::new(cues).expect("demo model is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_model_is_valid_and_round_trips() {
        let model = HmmModel::demo();
        let text = model.to_text();
        let back = HmmModel::from_text(&text).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn rejects_bad_rows_and_floor() {
        let mut model = HmmModel::demo();
        model.cues.get_mut(&Cue::Smile).unwrap().transition[0] = vec![0.5, 0.6];
        assert!(matches!(model.validate(), Err(ModelError::Invalid { cue: Cue::Smile, .. })));

        let mut model = HmmModel::demo();
        model.cues.get_mut(&Cue::Volume).unwrap().variances[1][0] = 1e-6;
        assert!(model.validate().is_err());

        let mut model = HmmModel::demo();
        model.cues.remove(&Cue::BodyMovement);
        assert_eq!(model.validate(), Err(ModelError::MissingCue(Cue::BodyMovement)));
    }

    #[test]
    fn rejects_unknown_format() {
        let text = HmmModel::demo().to_text().replace(MODEL_FORMAT, "confab-hmm/0");
        assert!(matches!(
            HmmModel::from_text(&text),
            Err(ModelError::UnsupportedFormat(_))
        ));
        assert!(matches!(HmmModel::from_text("{}"), Err(ModelError::Parse(_))));
    }

    #[test]
    fn missing_dimension_is_marginalized() {
        let m = HmmModel::demo();
        let vol = m.cue(Cue::Volume);
        let full = vol.emission_log_likelihoods(&[Some(60.0), Some(180.0)]);
        let partial = vol.emission_log_likelihoods(&[Some(60.0), None]);
        let pitch_only: Vec<f64> = (0..2)
            .map(|s| gaussian_log_pdf(180.0, vol.means[s][1], vol.variances[s][1]))
            .collect();
        for s in 0..2 {
            assert!((full[s] - partial[s] - pitch_only[s]).abs() < 1e-12);
        }
    }

    #[test]
    fn total_underflow_is_uninformative() {
        let m = HmmModel::demo();
        let ll = m.cue(Cue::Smile).emission_log_likelihoods(&[Some(1e300)]);
        assert_eq!(ll, vec![0.0, 0.0]);
    }
}
