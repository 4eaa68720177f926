use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// One of the four monitored nonverbal channels, each shown as an icon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cue {
    EyeContact,
    Smile,
    Volume,
    BodyMovement,
}

impl Cue {
    pub const ALL: [Cue; 4] = [Cue::EyeContact, Cue::Smile, Cue::Volume, Cue::BodyMovement];

    pub fn as_str(self) -> &'static str {
        match self {
            Cue::EyeContact => "eye_contact",
            Cue::Smile => "smile",
            Cue::Volume => "volume",
            Cue::BodyMovement => "body_movement",
        }
    }

    /// Human-facing label used in reports.
    pub fn label(self) -> &'static str {
        match self {
            Cue::EyeContact => "Eye contact",
            Cue::Smile => "Smile",
            Cue::Volume => "Speaking volume",
            Cue::BodyMovement => "Body movement",
        }
    }
}

impl fmt::Display for Cue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Cue {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().replace(['-', ' '], "_").as_str() {
            "eye_contact" | "eye" => Ok(Cue::EyeContact),
            "smile" => Ok(Cue::Smile),
            "volume" | "speaking_volume" => Ok(Cue::Volume),
            "body_movement" | "body" | "movement" => Ok(Cue::BodyMovement),
            _ => Err(format!("unknown cue {s:?}")),
        }
    }
}
