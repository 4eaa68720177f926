use std::path::Path;
use std::process::{Command, Output};

fn confab(data: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_confab"))
        .args(args)
        .env("CONFAB_DATA_DIR", data)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn script(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join(format!("scripts/{name}.toml"))
        .display()
        .to_string()
}

#[test]
fn simulate_then_summarize_and_replay() {
    let tmp = tempfile::tempdir().unwrap();
    let out = stdout(&confab(tmp.path(), &["simulate", "--script", &script("typical"), "--seed", "5"]));
    for name in ["Reminders", "Best Streak", "Response Lag"] {
        assert!(out.contains(&format!("{name}: ")), "{name} missing from:\n{out}");
    }
    assert!(out.contains("agent: I might sound a bit choppy"));
    assert!(tmp.path().join("sim-typical-5.jsonl").exists());

    let summary = stdout(&confab(tmp.path(), &["summarize", "--session", "sim-typical-5"]));
    for name in ["Reminders", "Best Streak", "Response Lag"] {
        assert!(summary.contains(name));
    }
    let replay = stdout(&confab(tmp.path(), &["replay", "--session", "sim-typical-5"]));
    assert!(replay.contains("replay identical"));

    // Re-running the same seed overwrites with identical bytes.
    let before = std::fs::read(tmp.path().join("sim-typical-5.jsonl")).unwrap();
    stdout(&confab(tmp.path(), &["simulate", "--script", &script("typical"), "--seed", "5", "--quiet"]));
    assert_eq!(std::fs::read(tmp.path().join("sim-typical-5.jsonl")).unwrap(), before);
}

#[test]
fn summarize_unknown_session_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let out = confab(tmp.path(), &["summarize", "--session", "ghost"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("ghost"));
}

#[test]
fn alpha_reports_per_cue_and_pooled() {
    let tmp = tempfile::tempdir().unwrap();
    let labels = tmp.path().join("marks.csv");
    std::fs::write(
        &labels,
        "rater,cue,start_ms,end_ms\n\
         ann,smile,0,1000\n\
         bob,smile,0,1000\n\
         ann,eye_contact,1000,2000\n\
         bob,eye_contact,1500,2000\n",
    )
    .unwrap();
    let out = stdout(&confab(tmp.path(), &["alpha", "--labels", labels.to_str().unwrap()]));
    assert!(out.contains("pooled"), "{out}");
    assert!(out.contains("mean of cues"));
    assert!(out.lines().any(|l| l.starts_with("Smile") && l.ends_with("1.0000")), "{out}");
}

#[test]
fn train_writes_a_loadable_model() {
    use confab::feedback::{FeatureFrame, HmmModel};
    use confab::trainer::write_frame_file;

    let tmp = tempfile::tempdir().unwrap();
    // 60 s at 10 Hz; every cue is "bad" during [20 s, 40 s).
    let frames: Vec<FeatureFrame> = (0..600u64)
        .map(|i| {
            let t = i * 100;
            let mut f = FeatureFrame::neutral(t);
            let wobble = (i % 7) as f64 / 7.0 - 0.5;
            f.head_pitch += 4.0 * wobble;
            f.smile += 0.2 * wobble;
            f.volume_db += 2.0 * wobble;
            f.movement += 0.05 * wobble.abs();
            if (20_000..40_000).contains(&t) {
                f.head_pitch = -25.0 + 4.0 * wobble;
                f.smile = 0.1 + 0.1 * wobble;
                f.volume_db = 42.0 + 2.0 * wobble;
                f.movement = 0.8 + 0.1 * wobble;
            }
            f
        })
        .collect();
    let features = tmp.path().join("frames.jsonl");
    std::fs::write(&features, write_frame_file(&frames)).unwrap();
    let mut marks = String::from("rater,cue,start_ms,end_ms\n");
    for rater in ["a", "b", "c", "d"] {
        for cue in ["eye_contact", "smile", "volume", "body_movement"] {
            marks.push_str(&format!("{rater},{cue},20000,40000\n"));
        }
    }
    let labels = tmp.path().join("marks.csv");
    std::fs::write(&labels, marks).unwrap();
    let model_path = tmp.path().join("model.json");
    let out = stdout(&confab(
        tmp.path(),
        &[
            "train",
            "--labels",
            labels.to_str().unwrap(),
            "--features",
            features.to_str().unwrap(),
            "--out",
            model_path.to_str().unwrap(),
        ],
    ));
    assert!(out.contains("model written"), "{out}");
    let model = HmmModel::load(&model_path).unwrap();
    let smile = model.cue(confab::Cue::Smile);
    assert!(smile.means[0][0] > 0.8 && smile.means[1][0] < 0.3, "{smile:?}");

    // The trained model drives a simulation.
    let sim = stdout(&confab(
        tmp.path(),
        &["simulate", "--script", &script("laconic"), "--seed", "1", "--quiet", "--models", model_path.to_str().unwrap()],
    ));
    assert!(sim.contains("Best Streak"));
}
