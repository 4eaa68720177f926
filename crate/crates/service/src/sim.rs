//! Scripted users for headless sessions. A script lists candidate answers
//! per question key; the seed picks among them and times the replies.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use confab::dialogue::{DialogueRules, GistMemory};
use confab::feedback::HmmModel;
use confab::synth::sample_stream;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{SegmentKind, SessionConfig};
use crate::protocol::{ClientMessage, ServerMessage};
use crate::record::{RecordError, RecordedSession};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Script {
    pub name: String,
    /// Range of time from the agent finishing to the user finishing.
    pub reply_ms: [u64; 2],
    /// Used to estimate how long the agent speaks.
    pub agent_ms_per_word: u64,
    /// Interval between feature frames.
    pub frame_ms: u64,
    /// Chance of ending an answer with a question back.
    pub question_rate: f64,
    pub questions: Vec<String>,
    /// Candidate answers by question key.
    pub answers: BTreeMap<String, Vec<String>>,
    /// Used for keys without their own answers.
    pub default_answers: Vec<String>,
}

impl Default for Script {
    fn default() -> Self {
        Script {
            name: "default".into(),
            reply_ms: [6_000, 12_000],
            agent_ms_per_word: 300,
            frame_ms: 100,
            question_rate: 0.0,
            questions: Vec::new(),
            answers: BTreeMap::new(),
            default_answers: vec!["I am not really sure what to say about that".into()],
        }
    }
}

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Toml(#[from] toml::de::Error),
    #[error("invalid script: {0}")]
    Invalid(String),
}

impl Script {
    pub fn parse(source: &str) -> Result<Self, ScriptError> {
        let script: Script = toml::from_str(source)?;
        if script.reply_ms[0] > script.reply_ms[1] {
            return Err(ScriptError::Invalid("reply_ms must be [low, high]".into()));
        }
        if script.frame_ms == 0 {
            return Err(ScriptError::Invalid("frame_ms must be positive".into()));
        }
        if script.default_answers.is_empty() {
            return Err(ScriptError::Invalid("default_answers is empty".into()));
        }
        if !(0.0..=1.0).contains(&script.question_rate)
            || (script.question_rate > 0.0 && script.questions.is_empty())
        {
            return Err(ScriptError::Invalid("question_rate needs questions and must be in [0, 1]".into()));
        }
        Ok(script)
    }

    pub fn load(path: &Path) -> Result<Self, ScriptError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScriptError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Script::parse(&text)
    }

    fn answer<R: Rng>(&self, rng: &mut R, key: Option<&str>) -> String {
        let pool = key
            .and_then(|k| self.answers.get(k))
            .filter(|p| !p.is_empty())
            .unwrap_or(&self.default_answers);
        let mut text = pool.choose(rng).expect("pool is non-empty").clone();
        if self.question_rate > 0.0 && rng.random_bool(self.question_rate) {
            text.push_str(". ");
            text.push_str(self.questions.choose(rng).expect("checked non-empty"));
        }
        text
    }
}

/// One user turn and the agent's reply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnLog {
    pub index: usize,
    pub user_text: String,
    pub user_t_ms: u64,
    pub agent_text: String,
    pub agent_t_ms: u64,
    /// Key of the new question the reply ends on.
    pub asked: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SimOutcome {
    pub opening: String,
    pub turns: Vec<TurnLog>,
    /// Every message the session sent, in order.
    pub outputs: Vec<ServerMessage>,
    pub memory: GistMemory,
    pub topics: Vec<String>,
    /// Deepest subschema nesting the plan reached.
    pub max_depth: usize,
    /// User turns rejected by the session.
    pub rejected: usize,
}

fn words(text: &str) -> u64 {
    text.split_whitespace().count() as u64
}

/// Frames for every conversation segment, sampled from `model`.
fn frames<R: Rng>(rng: &mut R, model: &HmmModel, config: &SessionConfig, frame_ms: u64) -> Vec<ClientMessage> {
    let mut out = Vec::new();
    let mut start = 0;
    for seg in &config.segments {
        if seg.kind == SegmentKind::Conversation {
            let steps = seg.duration_ms.div_ceil(frame_ms) as usize;
            for mut f in sample_stream(rng, model, steps, frame_ms).frames {
                f.t_ms += start;
                out.push(ClientMessage::Frame(f));
            }
        }
        start += seg.duration_ms;
    }
    out
}

/// Next conversation time at or after `t`, if any.
fn next_active(config: &SessionConfig, t: u64) -> Option<u64> {
    let mut start = 0;
    for seg in &config.segments {
        let end = start + seg.duration_ms;
        if seg.kind == SegmentKind::Conversation && t < end {
            return Some(t.max(start));
        }
        start = end;
    }
    None
}

/// Runs a full session with a scripted user, writing its record to `out`.
pub fn simulate<W: Write>(
    id: &str,
    script: &Script,
    config: SessionConfig,
    rules: Arc<DialogueRules>,
    model: Arc<HmmModel>,
    seed: u64,
    out: W,
) -> Result<(SimOutcome, W), RecordError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut frame_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let inbox = frames(&mut frame_rng, &model, &config, script.frame_ms);
    let (mut session, opening) =
        RecordedSession::start(id, config.clone(), rules, model, out)?;

    let io = |source| RecordError::Io {
        path: id.into(),
        source,
    };
    let (opening_text, opening_t) = match &opening[0] {
        ServerMessage::AgentTurn { text, t_ms, .. } => (text.clone(), *t_ms),
        other => unreachable!("session opens with an agent turn, got {other:?}"),
    };
    let mut outputs = opening.clone();
    let mut turns = Vec::new();
    let mut rejected = 0;
    // The user answers whatever the plan is waiting for.
    let awaited = |s: &RecordedSession<W>| {
        s.session()
            .conversation()
            .plan()
            .waiting_for()
            .map(str::to_string)
    };
    let mut asked = awaited(&session);
    let reply_after = |rng: &mut ChaCha8Rng, agent_text: &str, agent_t: u64| {
        let delay = rng.random_range(script.reply_ms[0]..=script.reply_ms[1]);
        let t = agent_t + words(agent_text) * script.agent_ms_per_word + delay;
        // A reply that would fall in a break comes that long after it.
        next_active(&config, t).map(|active| if active > t { active + delay } else { active })
    };
    let mut next_turn = reply_after(&mut rng, &opening_text, opening_t);

    let mut pending = inbox.into_iter().peekable();
    loop {
        let frame_t = match pending.peek() {
            Some(ClientMessage::Frame(f)) => Some(f.t_ms),
            _ => None,
        };
        let take_turn = match (next_turn, frame_t) {
            (Some(u), Some(f)) => u <= f,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => break,
        };
        if take_turn {
            let user_t = next_turn.expect("checked");
            let text = script.answer(&mut rng, asked.as_deref());
            let msg = ClientMessage::UserTurn {
                text: text.clone(),
                t_ms: user_t,
            };
            let replies = session.handle(&msg).map_err(io)?;
            outputs.extend(replies.iter().cloned());
            match replies.first() {
                Some(ServerMessage::AgentTurn { text: agent, t_ms, .. }) => {
                    let turn = session.session().last_agent_turn().expect("just replied");
                    turns.push(TurnLog {
                        index: turns.len(),
                        user_text: text,
                        user_t_ms: user_t,
                        agent_text: agent.clone(),
                        agent_t_ms: *t_ms,
                        asked: turn.asked.clone(),
                    });
                    asked = awaited(&session);
                    let finished = session.session().conversation().is_finished();
                    next_turn = if finished {
                        None
                    } else {
                        reply_after(&mut rng, agent, *t_ms)
                    };
                }
                _ => {
                    rejected += 1;
                    next_turn = None;
                }
            }
        } else {
            let msg = pending.next().expect("peeked");
            outputs.extend(session.handle(&msg).map_err(io)?);
        }
    }
    outputs.extend(session.handle(&ClientMessage::End).map_err(io)?);
    session.flush().map_err(io)?;

    let conversation = session.session().conversation();
    let plan = conversation.plan();
    let outcome = SimOutcome {
        opening: opening_text,
        turns,
        outputs,
        memory: conversation.memory().clone(),
        topics: plan.visited_topics().map(|t| t.label.clone()).collect(),
        max_depth: plan.events()[..plan.cursor()]
            .iter()
            .map(|e| e.depth)
            .max()
            .unwrap_or(0),
        rejected,
    };
    Ok((outcome, session.into_inner()))
}
