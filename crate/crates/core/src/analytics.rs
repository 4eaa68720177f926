//! Post-conversation summary: Reminders, Best Streak and Response Lag.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cue::Cue;
use crate::feedback::{EventKind, FeedbackEvent};

/// Feedback events of one conversation segment, timed from its start.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SessionTimeline {
    pub span_ms: u64,
    pub events: Vec<FeedbackEvent>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Ordering,
    Span,
    Alternation,
    UnexpectedAck,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("event {index}: {kind:?}: {detail}")]
pub struct Violation {
    pub index: usize,
    pub kind: ViolationKind,
    pub detail: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SummaryError {
    #[error("invalid timeline: {0}")]
    InvalidTimeline(#[from] Violation),
}

impl SessionTimeline {
    pub fn new(span_ms: u64) -> Self {
        SessionTimeline {
            span_ms,
            events: Vec::new(),
        }
    }

    /// Appends `other` after this timeline, shifting its events by this
    /// timeline's span.
    pub fn concat(&self, other: &SessionTimeline) -> SessionTimeline {
        let mut events = self.events.clone();
        events.extend(other.events.iter().map(|e| FeedbackEvent {
            t_ms: e.t_ms + self.span_ms,
            ..e.clone()
        }));
        SessionTimeline {
            span_ms: self.span_ms + other.span_ms,
            events,
        }
    }

    /// Closed `[start, end)` red intervals per cue. An interval still open
    /// at the end of the timeline runs to `span_ms`.
    pub fn red_intervals(&self) -> Vec<RedInterval> {
        let mut open: BTreeMap<Cue, u64> = BTreeMap::new();
        let mut out = Vec::new();
        for e in &self.events {
            match e.kind {
                EventKind::ReminderStart => {
                    open.insert(e.cue, e.t_ms);
                }
                EventKind::Resolved => {
                    if let Some(start) = open.remove(&e.cue) {
                        out.push(RedInterval {
                            cue: e.cue,
                            start_ms: start,
                            end_ms: e.t_ms,
                            resolved: true,
                        });
                    }
                }
                EventKind::PositiveAck => {}
            }
        }
        for (cue, start) in open {
            out.push(RedInterval {
                cue,
                start_ms: start,
                end_ms: self.span_ms,
                resolved: false,
            });
        }
        out.sort_by_key(|r| (r.start_ms, r.cue));
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RedInterval {
    pub cue: Cue,
    pub start_ms: u64,
    pub end_ms: u64,
    pub resolved: bool,
}

/// Checks ordering, span containment and per-cue alternation, reporting
/// the first violation found.
pub fn validate_timeline(timeline: &SessionTimeline) -> Result<(), Violation> {
    #[derive(Clone, Copy, PartialEq)]
    enum Phase {
        Green,
        Red,
        Resolved,
        Acked,
    }
    let mut phase: BTreeMap<Cue, Phase> = BTreeMap::new();
    let mut last_t = 0;
    for (index, e) in timeline.events.iter().enumerate() {
        let fail = |kind, detail: String| Err(Violation {
            index,
            kind,
            detail,
        });
        if e.t_ms < last_t {
            return fail(
                ViolationKind::Ordering,
                format!("{} ms comes after {} ms", e.t_ms, last_t),
            );
        }
        last_t = e.t_ms;
        if e.t_ms > timeline.span_ms {
            return fail(
                ViolationKind::Span,
                format!("{} ms is past the span end {} ms", e.t_ms, timeline.span_ms),
            );
        }
        let current = phase.entry(e.cue).or_insert(Phase::Green);
        *current = match (e.kind, *current) {
            (EventKind::ReminderStart, Phase::Red) => {
                return fail(
                    ViolationKind::Alternation,
                    format!("{} reminder started while already red", e.cue),
                )
            }
            (EventKind::ReminderStart, _) => Phase::Red,
            (EventKind::Resolved, Phase::Red) => Phase::Resolved,
            (EventKind::Resolved, _) => {
                return fail(
                    ViolationKind::Alternation,
                    format!("{} resolved without an open reminder", e.cue),
                )
            }
            (EventKind::PositiveAck, Phase::Resolved) => Phase::Acked,
            (EventKind::PositiveAck, _) => {
                return fail(
                    ViolationKind::UnexpectedAck,
                    format!("{} acknowledged without a preceding resolution", e.cue),
                )
            }
        };
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CueSummary {
    pub reminders: u32,
    pub resolved: u32,
    pub unresolved: u32,
    pub lag_total_ms: u64,
    /// Mean time from turning red to turning green again; absent when no
    /// reminder was resolved.
    pub response_lag_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SessionSummary {
    pub span_ms: u64,
    pub reminders: u32,
    /// Longest stretch with every icon green.
    pub best_streak_ms: u64,
    /// Mean over all resolved reminders, pooled across cues.
    pub response_lag_ms: Option<f64>,
    pub unresolved: u32,
    pub per_cue: BTreeMap<Cue, CueSummary>,
}

pub fn compute_summary(timeline: &SessionTimeline) -> Result<SessionSummary, SummaryError> {
    validate_timeline(timeline)?;
    let intervals = timeline.red_intervals();

    let mut per_cue: BTreeMap<Cue, CueSummary> =
        Cue::ALL.iter().map(|c| (*c, CueSummary::default())).collect();
    for r in &intervals {
        let s = per_cue.get_mut(&r.cue).expect("all cues present");
        s.reminders += 1;
        if r.resolved {
            s.resolved += 1;
            s.lag_total_ms += r.end_ms - r.start_ms;
        } else {
            s.unresolved += 1;
        }
    }
    for s in per_cue.values_mut() {
        s.response_lag_ms = mean(s.lag_total_ms, s.resolved);
    }
    let mut summary = SessionSummary {
        span_ms: timeline.span_ms,
        best_streak_ms: best_streak(timeline.span_ms, &intervals),
        per_cue,
        ..SessionSummary::default()
    };
    summary.refresh_totals();
    Ok(summary)
}

fn mean(total: u64, count: u32) -> Option<f64> {
    (count > 0).then(|| total as f64 / count as f64)
}

/// Longest gap in `[0, span)` not covered by any red interval.
fn best_streak(span_ms: u64, intervals: &[RedInterval]) -> u64 {
    let mut sorted: Vec<(u64, u64)> = intervals.iter().map(|r| (r.start_ms, r.end_ms)).collect();
    sorted.sort_unstable();
    let mut best = 0;
    let mut green_from = 0;
    for (start, end) in sorted {
        if start > green_from {
            best = best.max(start - green_from);
        }
        green_from = green_from.max(end);
    }
    best.max(span_ms.saturating_sub(green_from))
}

impl SessionSummary {
    fn refresh_totals(&mut self) {
        self.reminders = self.per_cue.values().map(|c| c.reminders).sum();
        self.unresolved = self.per_cue.values().map(|c| c.unresolved).sum();
        let resolved: u32 = self.per_cue.values().map(|c| c.resolved).sum();
        let lag: u64 = self.per_cue.values().map(|c| c.lag_total_ms).sum();
        self.response_lag_ms = mean(lag, resolved);
    }

    /// Combines per-segment summaries: counts and lags add up, the best
    /// streak is the best of any segment.
    pub fn merge<'a>(parts: impl IntoIterator<Item = &'a SessionSummary>) -> SessionSummary {
        let mut out = SessionSummary {
            per_cue: Cue::ALL.iter().map(|c| (*c, CueSummary::default())).collect(),
            ..SessionSummary::default()
        };
        for part in parts {
            out.span_ms += part.span_ms;
            out.best_streak_ms = out.best_streak_ms.max(part.best_streak_ms);
            for (cue, s) in &part.per_cue {
                let acc = out.per_cue.entry(*cue).or_default();
                acc.reminders += s.reminders;
                acc.resolved += s.resolved;
                acc.unresolved += s.unresolved;
                acc.lag_total_ms += s.lag_total_ms;
            }
        }
        for s in out.per_cue.values_mut() {
            s.response_lag_ms = mean(s.lag_total_ms, s.resolved);
        }
        out.refresh_totals();
        out
    }

    /// Plain-text report with the three headline metrics.
    pub fn report(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Reminders: {}", self.reminders);
        let _ = writeln!(out, "Best Streak: {}", format_duration(self.best_streak_ms));
        let _ = writeln!(out, "Response Lag: {}", format_lag(self.response_lag_ms));
        if self.unresolved > 0 {
            let _ = writeln!(out, "Unresolved: {}", self.unresolved);
        }
        for (cue, s) in &self.per_cue {
            let _ = writeln!(
                out,
                "  {:<16} reminders {:>3}  response lag {}",
                cue.label(),
                s.reminders,
                format_lag(s.response_lag_ms)
            );
        }
        out
    }
}

impl fmt::Display for SessionSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.report())
    }
}

fn format_duration(ms: u64) -> String {
    let secs = ms / 1000;
    format!("{}:{:02}.{} ({} ms)", secs / 60, secs % 60, (ms % 1000) / 100, ms)
}

fn format_lag(lag: Option<f64>) -> String {
    match lag {
        Some(ms) => format!("{:.1} s", ms / 1000.0),
        None => "n/a".to_string(),
    }
}
