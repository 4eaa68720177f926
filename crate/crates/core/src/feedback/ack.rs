use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::icons::{EventKind, FeedbackEvent};
use crate::cue::Cue;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AckPolicy {
    /// How long a cue must stay green after resolving before praise.
    pub confirm_ms: u64,
    pub lines: BTreeMap<Cue, String>,
}

impl Default for AckPolicy {
    fn default() -> Self {
        let lines = [
            (Cue::EyeContact, "You have good eye contact now"),
            (Cue::Smile, "Your smile looks great now"),
            (Cue::Volume, "Your speaking volume is just right now"),
            (Cue::BodyMovement, "You are keeping nice and steady now"),
        ];
        AckPolicy {
            confirm_ms: 10_000,
            lines: lines
                .into_iter()
                .map(|(c, l)| (c, l.to_string()))
                .collect(),
        }
    }
}

/// A praise line due for a cue, with the event that records it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Acknowledgment {
    pub event: FeedbackEvent,
    pub text: String,
}

/// Tracks resolutions waiting to be confirmed and which cues were already
/// praised in the current conversation segment.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AckTracker {
    pending: BTreeMap<Cue, u64>,
    praised: BTreeSet<Cue>,
}

impl AckTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn observe(&mut self, event: &FeedbackEvent) {
        match event.kind {
            EventKind::Resolved if !self.praised.contains(&event.cue) => {
                self.pending.insert(event.cue, event.t_ms);
            }
            EventKind::ReminderStart => {
                self.pending.remove(&event.cue);
            }
            _ => {}
        }
    }

    /// Emits praise for every pending resolution that has held for the
    /// confirmation window by `now_ms`.
    pub fn poll(&mut self, now_ms: u64, policy: &AckPolicy) -> Vec<Acknowledgment> {
        let due: Vec<Cue> = self
            .pending
            .iter()
            .filter(|(_, t)| now_ms.saturating_sub(**t) >= policy.confirm_ms)
            .map(|(c, _)| *c)
            .collect();
        due.into_iter()
            .filter_map(|cue| {
                self.pending.remove(&cue);
                if !self.praised.insert(cue) {
                    return None;
                }
                let text = policy.lines.get(&cue)?.clone();
                Some(Acknowledgment {
                    event: FeedbackEvent {
                        cue,
                        kind: EventKind::PositiveAck,
                        t_ms: now_ms,
                    },
                    text,
                })
            })
            .collect()
    }

    /// Starts a new conversation segment: every cue may be praised again.
    pub fn new_segment(&mut self) {
        self.pending.clear();
        self.praised.clear();
    }
}

/// One-shot check for a single resolution: praise is due when the cue has
/// not gone red again within the window and has not been praised yet.
pub fn emit_positive_ack(
    resolved: &FeedbackEvent,
    red_again_at: Option<u64>,
    already_praised: bool,
    now_ms: u64,
    policy: &AckPolicy,
) -> Option<String> {
    if resolved.kind != EventKind::Resolved || already_praised {
        return None;
    }
    let deadline = resolved.t_ms + policy.confirm_ms;
    if now_ms < deadline || red_again_at.is_some_and(|t| t < deadline) {
        return None;
    }
    policy.lines.get(&resolved.cue).cloned()
}
