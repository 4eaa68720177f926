use std::path::PathBuf;

use confab::dialogue::DialogueConfig;
use confab::feedback::{AckPolicy, IconPolicy};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    Conversation,
    Break,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub duration_ms: u64,
}

impl Segment {
    pub const fn conversation(duration_ms: u64) -> Self {
        Segment {
            kind: SegmentKind::Conversation,
            duration_ms,
        }
    }

    pub const fn pause(duration_ms: u64) -> Self {
        Segment {
            kind: SegmentKind::Break,
            duration_ms,
        }
    }
}

/// A five-minute conversation, a two-minute break, a four-minute conversation.
pub const DEFAULT_SEGMENTS: [Segment; 3] = [
    Segment::conversation(300_000),
    Segment::pause(120_000),
    Segment::conversation(240_000),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSource {
    /// The hand-set model compiled into the library.
    Demo,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    pub segments: Vec<Segment>,
    pub dialogue: DialogueConfig,
    pub model: ModelSource,
    pub icons: IconPolicy,
    pub acks: AckPolicy,
    pub seed: u64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            segments: DEFAULT_SEGMENTS.to_vec(),
            dialogue: DialogueConfig::default(),
            model: ModelSource::Demo,
            icons: IconPolicy::default(),
            acks: AckPolicy::default(),
            seed: 0,
        }
    }
}

/// Where a timestamp falls in the segment plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    In {
        index: usize,
        kind: SegmentKind,
        start_ms: u64,
    },
    After,
}

impl SessionConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.segments.is_empty() {
            return Err("no segments".into());
        }
        if let Some(i) = self.segments.iter().position(|s| s.duration_ms == 0) {
            return Err(format!("segment {i} has zero duration"));
        }
        if !self
            .segments
            .iter()
            .any(|s| s.kind == SegmentKind::Conversation)
        {
            return Err("no conversation segment".into());
        }
        if !self.icons.is_valid() {
            return Err("icon thresholds must satisfy 0 <= off < on <= 1".into());
        }
        if self.dialogue.topics.is_empty() {
            return Err("no topics".into());
        }
        Ok(())
    }

    pub fn total_ms(&self) -> u64 {
        self.segments.iter().map(|s| s.duration_ms).sum()
    }

    pub fn segment_start(&self, index: usize) -> u64 {
        self.segments[..index].iter().map(|s| s.duration_ms).sum()
    }

    pub fn place(&self, t_ms: u64) -> Placement {
        let mut start = 0;
        for (index, s) in self.segments.iter().enumerate() {
            if t_ms < start + s.duration_ms {
                return Placement::In {
                    index,
                    kind: s.kind,
                    start_ms: start,
                };
            }
            start += s.duration_ms;
        }
        Placement::After
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_plan_is_five_two_four_minutes() {
        let c = SessionConfig::default();
        assert_eq!(c.total_ms(), 660_000);
        assert_eq!(
            c.place(299_999),
            Placement::In {
                index: 0,
                kind: SegmentKind::Conversation,
                start_ms: 0
            }
        );
        assert_eq!(
            c.place(300_000),
            Placement::In {
                index: 1,
                kind: SegmentKind::Break,
                start_ms: 300_000
            }
        );
        assert_eq!(
            c.place(420_000),
            Placement::In {
                index: 2,
                kind: SegmentKind::Conversation,
                start_ms: 420_000
            }
        );
        assert_eq!(c.place(660_000), Placement::After);
    }

    #[test]
    fn zero_length_segment_is_invalid() {
        let c = SessionConfig {
            segments: vec![Segment::conversation(0)],
            ..SessionConfig::default()
        };
        assert!(c.validate().is_err());
        assert!(SessionConfig::default().validate().is_ok());
    }

    #[test]
    fn config_reads_from_toml() {
        let c: SessionConfig = toml::from_str(
            "seed = 7\n[[segments]]\nkind = \"conversation\"\nduration_ms = 1000\n",
        )
        .unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.segments, vec![Segment::conversation(1000)]);
        assert_eq!(c.model, ModelSource::Demo);
    }
}
