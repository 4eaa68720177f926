use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::filter::FilterState;
use crate::cue::Cue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IconColor {
    Green,
    FlashingRed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    ReminderStart,
    Resolved,
    PositiveAck,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackEvent {
    pub cue: Cue,
    pub kind: EventKind,
    pub t_ms: u64,
}

/// Thresholds and timings for switching icons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IconPolicy {
    /// Go red once P(needs feedback) stays above this for `dwell_ms`.
    pub on_threshold: f64,
    /// Go green once P(needs feedback) falls below this, after `min_red_ms`.
    pub off_threshold: f64,
    pub dwell_ms: u64,
    pub min_red_ms: u64,
}

impl Default for IconPolicy {
    fn default() -> Self {
        IconPolicy {
            on_threshold: 0.8,
            off_threshold: 0.4,
            dwell_ms: 500,
            min_red_ms: 1500,
        }
    }
}

impl IconPolicy {
    pub fn is_valid(&self) -> bool {
        (0.0..=1.0).contains(&self.off_threshold)
            && (0.0..=1.0).contains(&self.on_threshold)
            && self.on_threshold > self.off_threshold
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CueIcon {
    pub color: IconColor,
    pub since_ms: u64,
    /// Start of the current run above the on-threshold while green.
    pub above_since: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IconState {
    pub cues: BTreeMap<Cue, CueIcon>,
}

impl IconState {
    pub fn all_green(t_ms: u64) -> Self {
        let icon = CueIcon {
            color: IconColor::Green,
            since_ms: t_ms,
            above_since: None,
        };
        IconState {
            cues: Cue::ALL.iter().map(|c| (*c, icon)).collect(),
        }
    }

    pub fn color(&self, cue: Cue) -> IconColor {
        self.cues[&cue].color
    }
}

/// Applies the hysteresis policy to the current posteriors.
pub fn decide_icons(
    state: &FilterState,
    icons: &IconState,
    now_ms: u64,
    policy: &IconPolicy,
) -> (IconState, Vec<FeedbackEvent>) {
    let mut next = icons.clone();
    let mut events = Vec::new();
    for (cue, icon) in next.cues.iter_mut() {
        let p = state.needs_feedback(*cue);
        match icon.color {
            IconColor::Green => {
                if p > policy.on_threshold {
                    let start = *icon.above_since.get_or_insert(now_ms);
                    if now_ms.saturating_sub(start) >= policy.dwell_ms {
                        *icon = CueIcon {
                            color: IconColor::FlashingRed,
                            since_ms: now_ms,
                            above_since: None,
                        };
                        events.push(FeedbackEvent {
                            cue: *cue,
                            kind: EventKind::ReminderStart,
                            t_ms: now_ms,
                        });
                    }
                } else {
                    icon.above_since = None;
                }
            }
            IconColor::FlashingRed => {
                if p < policy.off_threshold
                    && now_ms.saturating_sub(icon.since_ms) >= policy.min_red_ms
                {
                    *icon = CueIcon {
                        color: IconColor::Green,
                        since_ms: now_ms,
                        above_since: None,
                    };
                    events.push(FeedbackEvent {
                        cue: *cue,
                        kind: EventKind::Resolved,
                        t_ms: now_ms,
                    });
                }
            }
        }
    }
    (next, events)
}
