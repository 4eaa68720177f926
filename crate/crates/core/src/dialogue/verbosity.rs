use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerbosityClass {
    Laconic,
    Typical,
    Verbose,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerbosityPolicy {
    /// Number of most recent turns averaged.
    pub window: usize,
    pub laconic_below: f64,
    pub verbose_above: f64,
    pub base_allowance_ms: u64,
    pub verbose_extra_ms: u64,
}

impl Default for VerbosityPolicy {
    fn default() -> Self {
        VerbosityPolicy {
            window: 5,
            laconic_below: 5.0,
            verbose_above: 40.0,
            base_allowance_ms: 1200,
            verbose_extra_ms: 800,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerbosityProfile {
    pub class: VerbosityClass,
    pub mean_words: f64,
    /// Silence tolerated after the user stops before the agent replies.
    pub silence_allowance_ms: u64,
}

impl VerbosityProfile {
    /// Short answers get a nudge to say more.
    pub fn wants_elaboration(&self) -> bool {
        self.class == VerbosityClass::Laconic
    }
}

/// Classifies the user by mean words per turn over the recent window.
pub fn gauge_verbosity(word_counts: &[usize], policy: &VerbosityPolicy) -> VerbosityProfile {
    let recent = &word_counts[word_counts.len().saturating_sub(policy.window.max(1))..];
    if recent.is_empty() {
        return VerbosityProfile {
            class: VerbosityClass::Typical,
            mean_words: 0.0,
            silence_allowance_ms: policy.base_allowance_ms,
        };
    }
    let mean = recent.iter().sum::<usize>() as f64 / recent.len() as f64;
    let class = if mean < policy.laconic_below {
        VerbosityClass::Laconic
    } else if mean > policy.verbose_above {
        VerbosityClass::Verbose
    } else {
        VerbosityClass::Typical
    };
    let silence_allowance_ms = match class {
        VerbosityClass::Verbose => policy.base_allowance_ms + policy.verbose_extra_ms,
        _ => policy.base_allowance_ms,
    };
    VerbosityProfile {
        class,
        mean_words: mean,
        silence_allowance_ms,
    }
}
