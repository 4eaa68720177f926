use confab::analytics::SessionTimeline;
use confab::feedback::{EventKind, FeedbackEvent};
use confab::Cue;
use rand::Rng;

/// What a tick-by-tick scan of a timeline finds.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub reminders: u32,
    pub unresolved: u32,
    pub best_streak_ms: u64,
    pub lags_ms: Vec<u64>,
}

impl SweepResult {
    pub fn mean_lag(&self) -> Option<f64> {
        (!self.lags_ms.is_empty())
            .then(|| self.lags_ms.iter().sum::<u64>() as f64 / self.lags_ms.len() as f64)
    }
}

/// Replays the events one millisecond at a time, tracking every cue's
/// colour at each tick `t` in `[0, span)`. A reminder starting at `t`
/// makes tick `t` red; a resolution at `t` makes tick `t` green.
pub fn millisecond_sweep(timeline: &SessionTimeline) -> SweepResult {
    let mut red_since: [Option<u64>; 4] = [None; 4];
    let idx = |c: Cue| Cue::ALL.iter().position(|x| *x == c).unwrap();
    let mut reminders = 0;
    let mut lags = Vec::new();
    let mut best = 0;
    let mut run = 0;
    let mut next_event = 0;
    for t in 0..timeline.span_ms {
        while next_event < timeline.events.len() && timeline.events[next_event].t_ms <= t {
            let e = &timeline.events[next_event];
            match e.kind {
                EventKind::ReminderStart => {
                    reminders += 1;
                    red_since[idx(e.cue)] = Some(e.t_ms);
                }
                EventKind::Resolved => {
                    if let Some(s) = red_since[idx(e.cue)].take() {
                        lags.push(e.t_ms - s);
                    }
                }
                EventKind::PositiveAck => {}
            }
            next_event += 1;
        }
        if red_since.iter().all(Option::is_none) {
            run += 1;
            best = best.max(run);
        } else {
            run = 0;
        }
    }
    // Events stamped exactly at the span end still count.
    for e in &timeline.events[next_event..] {
        match e.kind {
            EventKind::ReminderStart => {
                reminders += 1;
                red_since[idx(e.cue)] = Some(e.t_ms);
            }
            EventKind::Resolved => {
                if let Some(s) = red_since[idx(e.cue)].take() {
                    lags.push(e.t_ms - s);
                }
            }
            EventKind::PositiveAck => {}
        }
    }
    SweepResult {
        reminders,
        unresolved: red_since.iter().filter(|r| r.is_some()).count() as u32,
        best_streak_ms: best,
        lags_ms: lags,
    }
}

/// A random timeline that satisfies every validity rule: per-cue
/// alternation, sorted timestamps within the span, acks only after
/// resolutions.
pub fn valid_timeline<R: Rng>(rng: &mut R, span_ms: u64) -> SessionTimeline {
    let mut events = Vec::new();
    for cue in Cue::ALL {
        let mut t = 0u64;
        let mut red = false;
        let count = rng.random_range(0..8);
        for _ in 0..count {
            t += rng.random_range(0..span_ms / 6);
            if t > span_ms {
                break;
            }
            let kind = if red {
                EventKind::Resolved
            } else {
                EventKind::ReminderStart
            };
            events.push(FeedbackEvent { cue, kind, t_ms: t });
            red = !red;
            if !red && rng.random_bool(0.3) {
                let ack_t = t + rng.random_range(0..2000);
                if ack_t <= span_ms {
                    events.push(FeedbackEvent {
                        cue,
                        kind: EventKind::PositiveAck,
                        t_ms: ack_t,
                    });
                    t = ack_t;
                }
            }
        }
    }
    // Stable sort keeps each cue's own order when timestamps tie.
    events.sort_by_key(|e| e.t_ms);
    SessionTimeline { span_ms, events }
}
