use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::TrainError;
use crate::cue::Cue;

/// Default rater count a bin needs to become a feedback label: more than
/// two raters.
pub const DEFAULT_MIN_RATERS: usize = 3;
pub const DEFAULT_BIN_MS: u64 = 500;

/// One rater's claim that `cue` needed feedback during `[start_ms, end_ms)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawMark {
    pub rater: String,
    pub cue: Cue,
    pub start_ms: u64,
    pub end_ms: u64,
}

/// Binned binary marks, `cells[cue][rater][bin]`. `None` means the rater
/// did not rate that bin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkMatrix {
    pub bin_ms: u64,
    pub bins: usize,
    pub raters: Vec<String>,
    pub cells: BTreeMap<Cue, Vec<Vec<Option<bool>>>>,
}

impl MarkMatrix {
    /// An all-zero matrix.
    pub fn empty(raters: Vec<String>, bin_ms: u64, bins: usize) -> Result<Self, TrainError> {
        if raters.len() < 2 {
            return Err(TrainError::TooFewRaters(raters.len()));
        }
        let cells = Cue::ALL
            .iter()
            .map(|c| (*c, vec![vec![Some(false); bins]; raters.len()]))
            .collect();
        Ok(MarkMatrix {
            bin_ms,
            bins,
            raters,
            cells,
        })
    }

    pub fn rater_count(&self) -> usize {
        self.raters.len()
    }

    pub fn set(&mut self, cue: Cue, rater: usize, bin: usize, value: Option<bool>) {
        self.cells.get_mut(&cue).expect("all cues present")[rater][bin] = value;
    }

    pub fn get(&self, cue: Cue, rater: usize, bin: usize) -> Option<bool> {
        self.cells[&cue][rater][bin]
    }

    /// Ratings of every bin of `cue` as units for agreement analysis.
    pub fn units(&self, cue: Cue) -> Vec<Vec<Option<u32>>> {
        let rows = &self.cells[&cue];
        (0..self.bins)
            .map(|b| rows.iter().map(|r| r[b].map(u32::from)).collect())
            .collect()
    }
}

/// Discretizes raw marks. A rater's bin is set when the union of that
/// rater's intervals covers at least half a bin width of it.
///
/// The rater list is every rater named in `marks` plus `extra_raters`
/// (raters who marked nothing), sorted.
pub fn bin_marks(
    marks: &[RawMark],
    extra_raters: &[String],
    bin_ms: u64,
    span_ms: u64,
) -> Result<MarkMatrix, TrainError> {
    if bin_ms == 0 {
        return Err(TrainError::ZeroBinSize);
    }
    for m in marks {
        if m.start_ms > m.end_ms || m.end_ms > span_ms {
            return Err(TrainError::IntervalOutOfSpan {
                rater: m.rater.clone(),
                start_ms: m.start_ms,
                end_ms: m.end_ms,
                span_ms,
            });
        }
    }
    let raters: Vec<String> = marks
        .iter()
        .map(|m| m.rater.clone())
        .chain(extra_raters.iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let bins = span_ms.div_ceil(bin_ms) as usize;
    let mut matrix = MarkMatrix::empty(raters, bin_ms, bins)?;

    let mut grouped: BTreeMap<(usize, Cue), Vec<(u64, u64)>> = BTreeMap::new();
    for m in marks {
        let r = matrix
            .raters
            .binary_search(&m.rater)
            .expect("rater list built from marks");
        grouped
            .entry((r, m.cue))
            .or_default()
            .push((m.start_ms, m.end_ms));
    }
    for ((rater, cue), intervals) in grouped {
        for (start, end) in merge_intervals(intervals) {
            let first = (start / bin_ms) as usize;
            let last = (end.div_ceil(bin_ms) as usize).min(bins);
            for bin in first..last {
                let lo = bin as u64 * bin_ms;
                let hi = lo + bin_ms;
                let overlap = end.min(hi).saturating_sub(start.max(lo));
                if 2 * overlap >= bin_ms {
                    matrix.set(cue, rater, bin, Some(true));
                }
            }
        }
    }
    Ok(matrix)
}

fn merge_intervals(mut v: Vec<(u64, u64)>) -> Vec<(u64, u64)> {
    v.sort_unstable();
    let mut out: Vec<(u64, u64)> = Vec::with_capacity(v.len());
    for (s, e) in v {
        match out.last_mut() {
            Some(last) if s <= last.1 => last.1 = last.1.max(e),
            _ => out.push((s, e)),
        }
    }
    out
}

/// Per-bin training labels per cue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelTrack {
    pub bin_ms: u64,
    pub labels: BTreeMap<Cue, Vec<u8>>,
}

impl LabelTrack {
    pub fn bins(&self) -> usize {
        self.labels.values().next().map_or(0, Vec::len)
    }

    /// Label of the bin containing `t_ms`, if the track reaches that far.
    pub fn label_at(&self, cue: Cue, t_ms: u64) -> Option<u8> {
        self.labels
            .get(&cue)?
            .get((t_ms / self.bin_ms) as usize)
            .copied()
    }
}

/// A bin becomes a feedback label when at least `min_raters` raters marked
/// it. Unrated cells count as unmarked.
pub fn aggregate_labels(marks: &MarkMatrix, min_raters: usize) -> Result<LabelTrack, TrainError> {
    if min_raters > marks.rater_count() {
        return Err(TrainError::ThresholdExceedsRaters {
            threshold: min_raters,
            raters: marks.rater_count(),
        });
    }
    let labels = marks
        .cells
        .iter()
        .map(|(cue, rows)| {
            let track = (0..marks.bins)
                .map(|b| {
                    let votes = rows.iter().filter(|r| r[b] == Some(true)).count();
                    u8::from(votes >= min_raters)
                })
                .collect();
            (*cue, track)
        })
        .collect();
    Ok(LabelTrack {
        bin_ms: marks.bin_ms,
        labels,
    })
}
