use std::sync::Arc;

use confab::analytics::{compute_summary, SessionTimeline};
use confab::dialogue::DialogueRules;
use confab::feedback::{EventKind, FeatureFrame, FeedbackEvent};
use confab::Cue;
use confab_oracles::timeline::millisecond_sweep;
use confab_service::{ClientMessage, ServerMessage, Session, SessionConfig};

fn new_session() -> Session {
    Session::create("flow", SessionConfig::default(), Arc::new(DialogueRules::shipped()))
        .unwrap()
        .0
}

/// Feeds 10 Hz frames over `[from, to)`; `shape` bends the neutral frame.
fn feed(
    s: &mut Session,
    from: u64,
    to: u64,
    shape: impl Fn(u64, &mut FeatureFrame),
) -> Vec<ServerMessage> {
    let mut out = Vec::new();
    for t in (from..to).step_by(100) {
        let mut f = FeatureFrame::neutral(t);
        shape(t, &mut f);
        out.extend(s.handle(&ClientMessage::Frame(f)).unwrap());
    }
    out
}

fn summary(msg: ServerMessage) -> (Vec<confab_service::SegmentReport>, String) {
    match msg {
        ServerMessage::Summary {
            segments, report, ..
        } => (segments, report),
        other => panic!("expected a summary, got {other:?}"),
    }
}

#[test]
fn quiet_session_has_no_reminders_and_a_full_streak() {
    let mut s = new_session();
    let out = feed(&mut s, 0, 300_000, |_, _| {});
    assert!(out.is_empty(), "steady frames changed icons: {out:?}");
    let (segments, report) = summary(s.end().unwrap());
    assert_eq!(segments.len(), 1);
    assert_eq!(segments[0].summary.reminders, 0);
    assert_eq!(segments[0].summary.best_streak_ms, 300_000);
    assert!(report.contains("Reminders: 0"));
}

#[test]
fn two_reminders_summarize_like_their_timeline() {
    let mut s = new_session();
    let out = feed(&mut s, 0, 300_000, |t, f| {
        if (10_000..14_000).contains(&t) {
            f.smile = 0.0;
        }
        if (100_000..107_000).contains(&t) {
            f.head_pitch = -30.0;
        }
    });
    let events: Vec<FeedbackEvent> = out
        .iter()
        .filter_map(|m| match m {
            ServerMessage::Event { cue, kind, t_ms, .. } if *kind != EventKind::PositiveAck => {
                Some(FeedbackEvent {
                    cue: *cue,
                    kind: *kind,
                    t_ms: *t_ms,
                })
            }
            _ => None,
        })
        .collect();
    let starts: Vec<Cue> = events
        .iter()
        .filter(|e| e.kind == EventKind::ReminderStart)
        .map(|e| e.cue)
        .collect();
    assert_eq!(starts, vec![Cue::Smile, Cue::EyeContact]);

    let timeline = SessionTimeline {
        span_ms: 300_000,
        events,
    };
    let expected = compute_summary(&timeline).unwrap();
    let sweep = millisecond_sweep(&timeline);
    let (segments, _) = summary(s.end().unwrap());
    let got = &segments[0].summary;
    assert_eq!(got, &expected);
    assert_eq!(got.reminders, sweep.reminders);
    assert_eq!(got.best_streak_ms, sweep.best_streak_ms);
    assert_eq!(got.response_lag_ms, sweep.mean_lag());
}

#[test]
fn reminder_open_at_the_end_is_unresolved() {
    let mut s = new_session();
    feed(&mut s, 0, 20_000, |t, f| {
        if t >= 15_000 {
            f.smile = 0.0;
        }
    });
    let (segments, report) = summary(s.end().unwrap());
    assert_eq!(segments[0].summary.unresolved, 1);
    assert!(report.contains("Unresolved: 1"));
}

#[test]
fn each_segment_gets_its_own_summary() {
    let mut s = new_session();
    feed(&mut s, 0, 1_000, |_, _| {});
    assert_eq!(
        s.handle_user_turn("hello", 350_000).unwrap_err().code(),
        "session-not-active"
    );
    feed(&mut s, 420_000, 421_000, |_, _| {});
    let (segments, _) = summary(s.end().unwrap());
    let spans: Vec<(usize, u64, u64)> = segments
        .iter()
        .map(|r| (r.index, r.start_ms, r.summary.span_ms))
        .collect();
    assert_eq!(spans, vec![(0, 0, 300_000), (2, 420_000, 240_000)]);
    assert_eq!(s.end().unwrap_err().code(), "session-ended");
}

#[test]
fn free_time_answer_gets_a_reaction() {
    let mut s = new_session();
    for (i, text) in [
        "my name is sam",
        "i am from boston",
        "i am a student",
        "i study biology",
    ]
    .iter()
    .enumerate()
    {
        s.handle_user_turn(text, 5_000 + i as u64 * 10_000).unwrap();
    }
    // Walk the plan until it asks about free time.
    let mut t = 60_000;
    while s.last_agent_turn().and_then(|a| a.asked.clone()).as_deref() != Some("free-time") {
        s.handle_user_turn("i am not sure", t).unwrap();
        t += 5_000;
        assert!(t < 300_000, "free time never came up");
    }
    s.handle_user_turn("i mostly play video games", t).unwrap();
    let turn = s.last_agent_turn().unwrap();
    assert_eq!(turn.provenance, confab::dialogue::Provenance::Reaction);
    assert!(s
        .conversation()
        .memory()
        .has_statement("free-time"));
}
