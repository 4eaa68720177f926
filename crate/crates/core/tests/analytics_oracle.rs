use confab::analytics::{compute_summary, validate_timeline, SessionSummary, SessionTimeline};
use confab::feedback::{EventKind, FeedbackEvent};
use confab::Cue;
use confab_oracles::timeline::{millisecond_sweep, valid_timeline};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn summary_matches_millisecond_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..150 {
        let t = valid_timeline(&mut rng, 60_000);
        validate_timeline(&t).unwrap();
        let s = compute_summary(&t).unwrap();
        let o = millisecond_sweep(&t);
        assert_eq!(s.reminders, o.reminders);
        assert_eq!(s.unresolved, o.unresolved);
        assert_eq!(s.best_streak_ms, o.best_streak_ms, "{t:?}");
        assert_eq!(s.response_lag_ms, o.mean_lag());
    }
}

#[test]
fn worked_example_against_sweep() {
    let ev = |cue, kind, t_ms| FeedbackEvent { cue, kind, t_ms };
    let t = SessionTimeline {
        span_ms: 300_000,
        events: vec![
            ev(Cue::Smile, EventKind::ReminderStart, 10_000),
            ev(Cue::Smile, EventKind::Resolved, 14_000),
            ev(Cue::EyeContact, EventKind::ReminderStart, 100_000),
            ev(Cue::EyeContact, EventKind::Resolved, 107_000),
        ],
    };
    let o = millisecond_sweep(&t);
    assert_eq!(o.best_streak_ms, 193_000);
    assert_eq!(o.mean_lag(), Some(5500.0));
    assert_eq!(compute_summary(&t).unwrap().best_streak_ms, o.best_streak_ms);
}

#[test]
fn reminders_add_up_across_concatenation() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let a = valid_timeline(&mut rng, 30_000);
        let b = valid_timeline(&mut rng, 20_000);
        let sa = compute_summary(&a).unwrap();
        let sb = compute_summary(&b).unwrap();
        let joined = a.concat(&b);
        // Red intervals left open at the end of `a` resume in `b` only if
        // `b` starts red; skip those pairs.
        if validate_timeline(&joined).is_err() {
            continue;
        }
        let sj = compute_summary(&joined).unwrap();
        assert_eq!(sj.reminders, sa.reminders + sb.reminders);
        assert_eq!(SessionSummary::merge([&sa, &sb]).reminders, sj.reminders);
    }
}

#[test]
fn zero_events_gives_full_streak() {
    for span in [0, 1, 59_999, 300_000] {
        let s = compute_summary(&SessionTimeline::new(span)).unwrap();
        assert_eq!(s.best_streak_ms, span);
    }
}
