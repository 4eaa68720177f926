use std::path::Path;
use std::sync::Arc;

use confab::dialogue::DialogueRules;
use confab::feedback::HmmModel;
use confab_service::{
    replay, simulate, ClientMessage, DataDir, RecordError, RecordedSession, Script, SessionConfig,
    SessionRecord,
};

fn script(name: &str) -> Script {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("scripts/{name}.toml"));
    Script::load(&path).unwrap()
}

fn rules() -> Arc<DialogueRules> {
    Arc::new(DialogueRules::shipped())
}

#[test]
fn simulated_sessions_replay_byte_for_byte() {
    for (name, seed) in [("typical", 1), ("laconic", 2), ("verbose", 3)] {
        let (outcome, bytes) = simulate(
            "r",
            &script(name),
            SessionConfig::default(),
            rules(),
            Arc::new(HmmModel::demo()),
            seed,
            Vec::new(),
        )
        .unwrap();
        assert!(!outcome.turns.is_empty());
        let record = SessionRecord::parse(std::str::from_utf8(&bytes).unwrap(), "mem").unwrap();
        assert!(record.summary().is_some());
        assert_eq!(replay(&record, rules()).unwrap(), bytes, "{name}");
    }
}

#[test]
fn errors_are_recorded_and_replayed() {
    let (mut s, _) = RecordedSession::start(
        "e",
        SessionConfig::default(),
        rules(),
        Arc::new(HmmModel::demo()),
        Vec::new(),
    )
    .unwrap();
    let turn = |text: &str, t_ms| ClientMessage::UserTurn {
        text: text.into(),
        t_ms,
    };
    s.handle(&turn("my name is sam", 2_000)).unwrap();
    let out = s.handle(&turn("hello", 330_000)).unwrap();
    assert!(matches!(&out[0], confab_service::ServerMessage::Error { code, .. } if code == "session-not-active"));
    s.handle(&ClientMessage::End).unwrap();
    let bytes = s.into_inner();
    let record = SessionRecord::parse(std::str::from_utf8(&bytes).unwrap(), "mem").unwrap();
    assert_eq!(record.inputs.len(), 3);
    assert_eq!(replay(&record, rules()).unwrap(), bytes);
}

#[test]
fn data_dir_stores_lists_and_loads() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = DataDir::new(tmp.path().join("nested"));
    assert!(dir.list().unwrap().is_empty());
    for id in ["b", "a"] {
        let (_, out) = simulate(
            id,
            &script("laconic"),
            SessionConfig::default(),
            rules(),
            Arc::new(HmmModel::demo()),
            7,
            dir.create(id).unwrap(),
        )
        .unwrap();
        drop(out);
    }
    assert_eq!(dir.list().unwrap(), vec!["a", "b"]);
    assert!(matches!(dir.create("a"), Err(RecordError::Io { .. })));
    assert!(matches!(dir.load("zzz"), Err(RecordError::NotFound(_))));
    let record = dir.load("a").unwrap();
    assert_eq!(record.id, "a");
    assert_eq!(replay(&record, rules()).unwrap(), dir.read_bytes("a").unwrap());
    // Same seed, different id: only the id differs.
    let b = String::from_utf8(dir.read_bytes("b").unwrap()).unwrap();
    let a = String::from_utf8(dir.read_bytes("a").unwrap()).unwrap();
    assert_eq!(a.replace("\"id\":\"a\"", "\"id\":\"b\""), b);
}

#[test]
fn malformed_records_name_the_line() {
    let err = SessionRecord::parse("{\"record\":\"in\",\"msg\":{\"type\":\"end\"}}\nnot json\n", "x")
        .unwrap_err();
    assert!(matches!(err, RecordError::Parse { line: 2, .. }), "{err}");
    let err = SessionRecord::parse("", "x").unwrap_err();
    assert!(err.to_string().contains("missing header"));
}
