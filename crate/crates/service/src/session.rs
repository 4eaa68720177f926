use std::sync::Arc;

use confab::analytics::{compute_summary, SessionSummary, SessionTimeline};
use confab::dialogue::{AgentTurn, Conversation, DialogueRules, TopicError};
use confab::feedback::{
    decide_icons, AckTracker, EventKind, FeatureFrame, FeedbackEvent, FilterState, FrameError,
    HmmModel, IconColor, IconState, ModelError,
};
use thiserror::Error;

use crate::config::{ModelSource, Placement, SegmentKind, SessionConfig};
use crate::protocol::{ClientMessage, SegmentReport, ServerMessage};

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("model: {0}")]
    ModelLoad(#[from] ModelError),
    #[error("invalid topics: {0}")]
    Topics(#[from] TopicError),
    #[error("no conversation is running at {t_ms} ms")]
    NotActive { t_ms: u64 },
    #[error("session time is over at {t_ms} ms")]
    Expired { t_ms: u64 },
    #[error("user turn at {got} ms precedes the previous one at {previous} ms")]
    TurnOutOfOrder { previous: u64, got: u64 },
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("session already ended")]
    Ended,
    #[error("unknown session {0:?}")]
    UnknownSession(String),
}

impl SessionError {
    /// Short machine-readable name used on the wire.
    pub fn code(&self) -> &'static str {
        match self {
            SessionError::InvalidConfig(_) => "invalid-config",
            SessionError::ModelLoad(_) => "model-load-failure",
            SessionError::Topics(_) => "invalid-config",
            SessionError::NotActive { .. } => "session-not-active",
            SessionError::Expired { .. } => "session-expired",
            SessionError::TurnOutOfOrder { .. } => "non-monotonic-timestamp",
            SessionError::Frame(FrameError::NonMonotonicTimestamp { .. }) => {
                "non-monotonic-timestamp"
            }
            SessionError::Frame(_) => "bad-frame",
            SessionError::Ended => "session-ended",
            SessionError::UnknownSession(_) => "unknown-session",
        }
    }

    pub fn to_message(&self) -> ServerMessage {
        ServerMessage::Error {
            code: self.code().to_string(),
            message: self.to_string(),
        }
    }
}

pub fn load_model(source: &ModelSource) -> Result<HmmModel, ModelError> {
    match source {
        ModelSource::Demo => Ok(HmmModel::demo()),
        ModelSource::File(path) => HmmModel::load(path),
    }
}

/// Feedback state for the conversation segment in progress.
#[derive(Debug, Clone)]
struct SegmentFeedback {
    index: usize,
    start_ms: u64,
    filter: FilterState,
    icons: IconState,
    acks: AckTracker,
    events: Vec<FeedbackEvent>,
}

impl SegmentFeedback {
    fn new(index: usize, start_ms: u64, model: &HmmModel) -> Self {
        SegmentFeedback {
            index,
            start_ms,
            filter: FilterState::new(model),
            icons: IconState::all_green(start_ms),
            acks: AckTracker::new(),
            events: Vec::new(),
        }
    }
}

/// One user's practice session on a simulated clock driven by message
/// timestamps.
#[derive(Debug)]
pub struct Session {
    id: String,
    config: SessionConfig,
    model: Arc<HmmModel>,
    conversation: Conversation,
    segment: SegmentFeedback,
    reports: Vec<SegmentReport>,
    last_frame_ms: Option<u64>,
    last_turn_ms: Option<u64>,
    next_event: u64,
    last_agent_turn: Option<AgentTurn>,
    ended: bool,
}

impl Session {
    /// Starts a session and returns it with its opening messages.
    pub fn new(
        id: impl Into<String>,
        config: SessionConfig,
        rules: Arc<DialogueRules>,
        model: Arc<HmmModel>,
    ) -> Result<(Session, Vec<ServerMessage>), SessionError> {
        config.validate().map_err(SessionError::InvalidConfig)?;
        let mut conversation = Conversation::new(rules, config.dialogue.clone())?;
        let first = config
            .segments
            .iter()
            .position(|s| s.kind == SegmentKind::Conversation)
            .expect("validated");
        let start_ms = config.segment_start(first);
        let opening = conversation.open();
        let session = Session {
            id: id.into(),
            segment: SegmentFeedback::new(first, start_ms, &model),
            config,
            model,
            conversation,
            reports: Vec::new(),
            last_frame_ms: None,
            last_turn_ms: None,
            next_event: 0,
            last_agent_turn: None,
            ended: false,
        };
        Ok((session, vec![agent_message(opening, start_ms)]))
    }

    /// Like [`Session::new`] but loads the model named in the config.
    pub fn create(
        id: impl Into<String>,
        config: SessionConfig,
        rules: Arc<DialogueRules>,
    ) -> Result<(Session, Vec<ServerMessage>), SessionError> {
        let model = Arc::new(load_model(&config.model)?);
        Session::new(id, config, rules, model)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn conversation(&self) -> &Conversation {
        &self.conversation
    }

    /// The dialogue-level view of the latest reply.
    pub fn last_agent_turn(&self) -> Option<&AgentTurn> {
        self.last_agent_turn.as_ref()
    }

    pub fn is_ended(&self) -> bool {
        self.ended
    }

    pub fn handle(&mut self, msg: &ClientMessage) -> Result<Vec<ServerMessage>, SessionError> {
        match msg {
            ClientMessage::UserTurn { text, t_ms } => {
                self.handle_user_turn(text, *t_ms).map(|m| vec![m])
            }
            ClientMessage::Frame(frame) => self.handle_frame(frame),
            ClientMessage::End => self.end().map(|m| vec![m]),
        }
    }

    fn enter(&mut self, t_ms: u64) -> Result<(), SessionError> {
        if self.ended {
            return Err(SessionError::Ended);
        }
        match self.config.place(t_ms) {
            Placement::After => Err(SessionError::Expired { t_ms }),
            Placement::In {
                kind: SegmentKind::Break,
                ..
            } => Err(SessionError::NotActive { t_ms }),
            Placement::In {
                index, start_ms, ..
            } => {
                if index > self.segment.index {
                    self.close_segment();
                    self.segment = SegmentFeedback::new(index, start_ms, &self.model);
                }
                Ok(())
            }
        }
    }

    /// Runs the dialogue pipeline on one user utterance. The reply is timed
    /// after the silence allowance for this user; a reply that would fall
    /// past the segment end waits for the next conversation segment, or is
    /// sent at the last instant of the session if there is none.
    pub fn handle_user_turn(&mut self, text: &str, t_ms: u64) -> Result<ServerMessage, SessionError> {
        if let Some(previous) = self.last_turn_ms {
            if t_ms < previous {
                return Err(SessionError::TurnOutOfOrder { previous, got: t_ms });
            }
        }
        self.enter(t_ms)?;
        let allowance = self.conversation.profile().silence_allowance_ms;
        let mut reply_at = t_ms + allowance;
        if self.config.place(reply_at) != self.config.place(t_ms) {
            let next = (self.segment.index + 1..self.config.segments.len())
                .find(|&i| self.config.segments[i].kind == SegmentKind::Conversation);
            reply_at = match next {
                Some(i) => self.config.segment_start(i),
                None => self.config.total_ms() - 1,
            };
        }
        self.last_turn_ms = Some(t_ms);
        let turn = self.conversation.respond(text);
        self.last_agent_turn = Some(turn.clone());
        Ok(agent_message(turn, reply_at))
    }

    /// Filters one frame and reports icon changes and praise.
    pub fn handle_frame(&mut self, frame: &FeatureFrame) -> Result<Vec<ServerMessage>, SessionError> {
        if let Some(previous) = self.last_frame_ms {
            if frame.t_ms <= previous {
                return Err(FrameError::NonMonotonicTimestamp {
                    previous,
                    got: frame.t_ms,
                }
                .into());
            }
        }
        self.enter(frame.t_ms)?;
        self.segment.filter.ingest(&self.model, frame)?;
        self.last_frame_ms = Some(frame.t_ms);

        let mut out = Vec::new();
        for ack in self.segment.acks.poll(frame.t_ms, &self.config.acks) {
            self.segment.events.push(ack.event.clone());
            out.push(self.event_message(&ack.event, Some(ack.text)));
        }
        let (icons, events) = decide_icons(
            &self.segment.filter,
            &self.segment.icons,
            frame.t_ms,
            &self.config.icons,
        );
        self.segment.icons = icons;
        for event in events {
            self.segment.acks.observe(&event);
            let color = match event.kind {
                EventKind::ReminderStart => IconColor::FlashingRed,
                _ => IconColor::Green,
            };
            out.push(ServerMessage::Icon {
                cue: event.cue,
                color,
                t_ms: event.t_ms,
            });
            out.push(self.event_message(&event, None));
            self.segment.events.push(event);
        }
        Ok(out)
    }

    fn event_message(&mut self, event: &FeedbackEvent, text: Option<String>) -> ServerMessage {
        let index = self.next_event;
        self.next_event += 1;
        ServerMessage::Event {
            cue: event.cue,
            kind: event.kind,
            t_ms: event.t_ms,
            index,
            text,
        }
    }

    fn close_segment(&mut self) {
        let seg = &self.segment;
        let timeline = SessionTimeline {
            span_ms: self.config.segments[seg.index].duration_ms,
            events: seg
                .events
                .iter()
                .map(|e| FeedbackEvent {
                    t_ms: e.t_ms - seg.start_ms,
                    ..e.clone()
                })
                .collect(),
        };
        let summary = compute_summary(&timeline).expect("session events form a valid timeline");
        self.reports.push(SegmentReport {
            index: seg.index,
            start_ms: seg.start_ms,
            summary,
        });
    }

    /// Closes the session. Every conversation segment that was reached gets
    /// its own summary; the overall summary merges them.
    pub fn end(&mut self) -> Result<ServerMessage, SessionError> {
        if self.ended {
            return Err(SessionError::Ended);
        }
        self.close_segment();
        self.ended = true;
        let overall = SessionSummary::merge(self.reports.iter().map(|r| &r.summary));
        Ok(ServerMessage::Summary {
            segments: self.reports.clone(),
            report: overall.report(),
            overall,
        })
    }
}

fn agent_message(turn: AgentTurn, t_ms: u64) -> ServerMessage {
    ServerMessage::AgentTurn {
        text: turn.text,
        provenance: turn.provenance,
        t_ms,
    }
}
