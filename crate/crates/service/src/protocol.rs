//! JSON messages exchanged with clients. Every message carries a `type`.

use confab::analytics::SessionSummary;
use confab::dialogue::Provenance;
use confab::feedback::{EventKind, FeatureFrame, IconColor};
use confab::Cue;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    /// The user finished speaking at `t_ms`.
    UserTurn { text: String, t_ms: u64 },
    Frame(FeatureFrame),
    End,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentReport {
    pub index: usize,
    pub start_ms: u64,
    pub summary: SessionSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    AgentTurn {
        text: String,
        provenance: Provenance,
        t_ms: u64,
    },
    Icon {
        cue: Cue,
        color: IconColor,
        t_ms: u64,
    },
    /// `index` numbers events within a session so clients can drop
    /// duplicates. Positive acknowledgments carry the line to show.
    Event {
        cue: Cue,
        kind: EventKind,
        t_ms: u64,
        index: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        text: Option<String>,
    },
    Summary {
        segments: Vec<SegmentReport>,
        overall: SessionSummary,
        /// The overall summary rendered for display.
        report: String,
    },
    Error {
        code: String,
        message: String,
    },
}

impl ServerMessage {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages serialize")
    }
}

impl ClientMessage {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("client messages serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wire_shapes() {
        let m: ClientMessage =
            serde_json::from_str(r#"{"type":"user_turn","text":"hi","t_ms":5}"#).unwrap();
        assert_eq!(
            m,
            ClientMessage::UserTurn {
                text: "hi".into(),
                t_ms: 5
            }
        );
        let f: ClientMessage = serde_json::from_str(
            r#"{"type":"frame","t_ms":10,"head_pitch":0,"head_yaw":0,"head_roll":0,"smile":1,"volume_db":60,"movement":0.1}"#,
        )
        .unwrap();
        assert!(matches!(f, ClientMessage::Frame(ref fr) if fr.t_ms == 10 && fr.voice_pitch_hz.is_none()));
        let e: ClientMessage = serde_json::from_str(r#"{"type":"end"}"#).unwrap();
        assert_eq!(e, ClientMessage::End);

        let icon = ServerMessage::Icon {
            cue: Cue::Smile,
            color: IconColor::FlashingRed,
            t_ms: 3,
        };
        assert_eq!(icon.to_json(), r#"{"type":"icon","cue":"smile","color":"flashing_red","t_ms":3}"#);
        let turn = ServerMessage::AgentTurn {
            text: "Hi".into(),
            provenance: Provenance::ScheduledEvent,
            t_ms: 0,
        };
        assert_eq!(
            turn.to_json(),
            r#"{"type":"agent_turn","text":"Hi","provenance":"scheduled-event","t_ms":0}"#
        );
    }
}
