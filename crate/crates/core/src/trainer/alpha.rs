use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::marks::MarkMatrix;
use super::TrainError;
use crate::cue::Cue;

/// Krippendorff's alpha for nominal data.
///
/// `units[u]` holds every rater's value for unit `u` (`None` = not rated).
/// Units with fewer than two ratings are not pairable and are ignored.
/// Uses the coincidence matrix: each ordered pair of values inside a unit
/// with `m` ratings contributes `1 / (m - 1)`.
pub fn krippendorff_alpha(units: &[Vec<Option<u32>>]) -> Result<f64, TrainError> {
    let mut coincidence: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    for unit in units {
        let values: Vec<u32> = unit.iter().flatten().copied().collect();
        let m = values.len();
        if m < 2 {
            continue;
        }
        let weight = 1.0 / (m - 1) as f64;
        for (i, a) in values.iter().enumerate() {
            for (j, b) in values.iter().enumerate() {
                if i != j {
                    *coincidence.entry((*a, *b)).or_default() += weight;
                }
            }
        }
    }
    if coincidence.is_empty() {
        return Err(TrainError::InsufficientData);
    }
    let mut marginals: BTreeMap<u32, f64> = BTreeMap::new();
    for (&(c, _), &o) in &coincidence {
        *marginals.entry(c).or_default() += o;
    }
    let n: f64 = marginals.values().sum();
    let observed: f64 = coincidence
        .iter()
        .filter(|((c, k), _)| c != k)
        .map(|(_, o)| o)
        .sum();
    if observed == 0.0 {
        return Ok(1.0);
    }
    let mut expected_pairs = 0.0;
    for (c, nc) in &marginals {
        for (k, nk) in &marginals {
            if c != k {
                expected_pairs += nc * nk;
            }
        }
    }
    Ok(1.0 - (n - 1.0) * observed / expected_pairs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    /// Alpha per cue; `None` where the cue has no pairable ratings.
    pub per_cue: BTreeMap<Cue, Option<f64>>,
    /// Alpha over every (cue, bin) unit at once.
    pub pooled: f64,
    /// Unweighted mean of the per-cue values that exist.
    pub mean_of_cues: Option<f64>,
}

pub fn agreement(marks: &MarkMatrix) -> Result<AgreementReport, TrainError> {
    let per_cue: BTreeMap<Cue, Option<f64>> = Cue::ALL
        .iter()
        .map(|c| (*c, krippendorff_alpha(&marks.units(*c)).ok()))
        .collect();
    let all_units: Vec<Vec<Option<u32>>> = Cue::ALL.iter().flat_map(|c| marks.units(*c)).collect();
    let pooled = krippendorff_alpha(&all_units)?;
    let present: Vec<f64> = per_cue.values().flatten().copied().collect();
    let mean_of_cues = (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64);
    Ok(AgreementReport {
        per_cue,
        pooled,
        mean_of_cues,
    })
}
