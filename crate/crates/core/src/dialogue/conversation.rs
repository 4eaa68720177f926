use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::transduction::{annotate, tokenize};

use super::gist::{extract_gists_from_text, GistMemory};
use super::plan::{DialoguePlan, TopicError, Utterance};
use super::reaction::{generate_reaction, AgentTurn, Provenance};
use super::rules::DialogueRules;
use super::verbosity::{gauge_verbosity, VerbosityPolicy, VerbosityProfile};

/// The default topic order.
pub const DEFAULT_TOPICS: [&str; 6] = [
    "getting to know each other",
    "living in the current city",
    "crazy room",
    "city I want to move to in future",
    "free time",
    "movies",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DialogueConfig {
    /// Schema ids or topic labels, in order.
    pub topics: Vec<String>,
    pub verbosity: VerbosityPolicy,
    /// Mean words per turn under which a topic category counts as one the
    /// user is indifferent to.
    pub indifference_below: f64,
    /// Ask laconic users to say more, once per question.
    pub elaborate: bool,
}

impl Default for DialogueConfig {
    fn default() -> Self {
        DialogueConfig {
            topics: DEFAULT_TOPICS.iter().map(|t| t.to_string()).collect(),
            verbosity: VerbosityPolicy::default(),
            indifference_below: 5.0,
            elaborate: true,
        }
    }
}

/// One user's conversation: plan, memory and turn history.
#[derive(Debug, Clone)]
pub struct Conversation {
    rules: Arc<DialogueRules>,
    config: DialogueConfig,
    plan: DialoguePlan,
    memory: GistMemory,
    word_counts: Vec<usize>,
    elaborated: BTreeSet<String>,
    closed: bool,
}

impl Conversation {
    pub fn new(rules: Arc<DialogueRules>, config: DialogueConfig) -> Result<Self, TopicError> {
        let plan = DialoguePlan::new(&rules.schemas, &config.topics)?;
        Ok(Conversation {
            rules,
            config,
            plan,
            memory: GistMemory::new(),
            word_counts: Vec::new(),
            elaborated: BTreeSet::new(),
            closed: false,
        })
    }

    /// The agent's first turn: the start of the first topic up to its first
    /// question.
    pub fn open(&mut self) -> AgentTurn {
        let (emitted, waiting) = self.run_plan(None);
        compose(None, emitted, waiting)
    }

    /// Exactly one agent turn per user turn.
    pub fn respond(&mut self, text: &str) -> AgentTurn {
        let turn = self.word_counts.len();
        let words = tokenize(text).len();
        self.word_counts.push(words);
        self.plan.record_turn(words);

        let context = self.plan.waiting_for().map(str::to_string);
        let gists = extract_gists_from_text(&self.rules, text, context.as_deref(), turn);
        let reaction = generate_reaction(&gists, &mut self.memory, &self.rules);

        if let Some(key) = &context {
            if self.config.elaborate
                && self.profile().wants_elaboration()
                && self.elaborated.insert(key.clone())
            {
                let mut out = reaction;
                out.asked = None;
                out.text = format!("{} {}", out.text, self.rules.prompts.elaborate);
                return out;
            }
        }

        let annotated = annotate(text, &self.rules.lexicon);
        let (emitted, waiting) = self.run_plan(Some(&annotated));
        compose(Some(reaction), emitted, waiting)
    }

    fn run_plan(
        &mut self,
        last: Option<&crate::transduction::AnnotatedUtterance>,
    ) -> (Vec<Utterance>, Option<String>) {
        let mut emitted = Vec::new();
        loop {
            match self.plan.advance(&self.rules.schemas, &self.memory, last) {
                Ok(step) => {
                    emitted.extend(step.emitted);
                    if step.waiting.is_some() {
                        return (emitted, step.waiting);
                    }
                }
                Err(_) if self.plan.has_unvisited_topics() => {
                    self.plan
                        .start_next_topic(&self.rules.schemas, self.config.indifference_below)
                        .expect("an unvisited topic remains");
                }
                Err(_) => {
                    if !self.closed {
                        self.closed = true;
                        emitted.push(Utterance {
                            text: self.rules.prompts.closing.clone(),
                            asks: None,
                            depth: 0,
                        });
                    }
                    return (emitted, None);
                }
            }
        }
    }

    pub fn profile(&self) -> VerbosityProfile {
        gauge_verbosity(&self.word_counts, &self.config.verbosity)
    }

    pub fn memory(&self) -> &GistMemory {
        &self.memory
    }

    pub fn plan(&self) -> &DialoguePlan {
        &self.plan
    }

    /// Whether every topic has been covered and the closing line said.
    pub fn is_finished(&self) -> bool {
        self.closed
    }
}

fn compose(reaction: Option<AgentTurn>, emitted: Vec<Utterance>, waiting: Option<String>) -> AgentTurn {
    let asked = emitted.iter().rev().find_map(|u| u.asks.clone()).or(waiting);
    let mut parts: Vec<String> = Vec::new();
    let (provenance, gists) = match reaction {
        Some(r) => {
            parts.push(r.text);
            (r.provenance, r.gists)
        }
        None => (Provenance::ScheduledEvent, Vec::new()),
    };
    parts.extend(emitted.into_iter().map(|u| u.text));
    AgentTurn {
        text: join_sentences(&parts),
        provenance,
        gists,
        asked,
    }
}

/// Joins utterances, ending each with a full stop unless it already ends
/// in sentence punctuation.
fn join_sentences(parts: &[String]) -> String {
    let mut out = String::new();
    for (i, p) in parts.iter().enumerate() {
        out.push_str(p);
        if i + 1 < parts.len() {
            if !p.ends_with(['.', '?', '!']) {
                out.push('.');
            }
            out.push(' ');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sentences_get_terminal_punctuation_when_joined() {
        let parts = ["I might sound a bit choppy".to_string(), "What is your name?".to_string()];
        assert_eq!(join_sentences(&parts), "I might sound a bit choppy. What is your name?");
        assert_eq!(join_sentences(&["Hi".to_string()]), "Hi");
    }
}
