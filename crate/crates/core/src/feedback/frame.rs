use serde::{Deserialize, Serialize};

use crate::cue::Cue;

/// Nonverbal features extracted for one instant of the session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureFrame {
    /// Milliseconds since session start.
    pub t_ms: u64,
    pub head_pitch: f64,
    pub head_yaw: f64,
    pub head_roll: f64,
    pub smile: f64,
    #[serde(default)]
    pub action_units: Vec<f64>,
    pub volume_db: f64,
    /// Absent while the user is not voicing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub voice_pitch_hz: Option<f64>,
    pub movement: f64,
}

impl FeatureFrame {
    /// A neutral frame: facing the screen, light smile, normal voice.
    pub fn neutral(t_ms: u64) -> Self {
        FeatureFrame {
            t_ms,
            head_pitch: 0.0,
            head_yaw: 0.0,
            head_roll: 0.0,
            smile: 1.0,
            action_units: Vec::new(),
            volume_db: 60.0,
            voice_pitch_hz: Some(180.0),
            movement: 0.1,
        }
    }

    /// Name of the first non-finite field, if any.
    pub fn non_finite_field(&self) -> Option<&'static str> {
        let scalars = [
            ("head_pitch", self.head_pitch),
            ("head_yaw", self.head_yaw),
            ("head_roll", self.head_roll),
            ("smile", self.smile),
            ("volume_db", self.volume_db),
            ("movement", self.movement),
        ];
        if let Some((name, _)) = scalars.iter().find(|(_, v)| !v.is_finite()) {
            return Some(name);
        }
        if self.voice_pitch_hz.is_some_and(|p| !p.is_finite()) {
            return Some("voice_pitch_hz");
        }
        if self.action_units.iter().any(|v| !v.is_finite()) {
            return Some("action_units");
        }
        None
    }

    /// The feature subvector a cue's model observes. `None` entries are
    /// missing and get marginalized out.
    ///
    /// | cue           | features                          |
    /// |---------------|-----------------------------------|
    /// | eye contact   | head pitch, head yaw              |
    /// | smile         | smile intensity, action units...  |
    /// | volume        | volume (dB), voice pitch (Hz)     |
    /// | body movement | movement magnitude                |
    pub fn observation(&self, cue: Cue) -> Vec<Option<f64>> {
        match cue {
            Cue::EyeContact => vec![Some(self.head_pitch), Some(self.head_yaw)],
            Cue::Smile => std::iter::once(Some(self.smile))
                .chain(self.action_units.iter().copied().map(Some))
                .collect(),
            Cue::Volume => vec![Some(self.volume_db), self.voice_pitch_hz],
            Cue::BodyMovement => vec![Some(self.movement)],
        }
    }
}
