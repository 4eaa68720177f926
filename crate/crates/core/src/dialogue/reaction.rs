use serde::{Deserialize, Serialize};

use crate::transduction::{annotate, TransductionTree};

use super::gist::{GistClause, GistKind, GistMemory};
use super::rules::DialogueRules;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Reaction,
    Answer,
    ScheduledEvent,
    Prompt,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Reaction => "reaction",
            Provenance::Answer => "answer",
            Provenance::ScheduledEvent => "scheduled-event",
            Provenance::Prompt => "prompt",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentTurn {
    pub text: String,
    pub provenance: Provenance,
    /// Gists this turn responds to.
    pub gists: Vec<String>,
    /// Context key of the new question this turn ends with, if any. A
    /// follow-up such as an elaboration prompt asks nothing new.
    pub asked: Option<String>,
}

fn first_output(trees: Vec<&TransductionTree>, rules: &DialogueRules, text: &str) -> Option<String> {
    let input = annotate(text, &rules.lexicon);
    trees.into_iter().find_map(|tree| {
        let texts = tree.transduce_texts(&input);
        (!texts.is_empty()).then(|| sentence_case(&texts.join(" ")))
    })
}

fn sentence_case(text: &str) -> String {
    let mut chars = text.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Second transduction stage. A user question is answered; otherwise the
/// first statement gist gets a reaction; otherwise the fallback prompt is
/// used. Every gist is remembered.
pub fn generate_reaction(
    gists: &[GistClause],
    memory: &mut GistMemory,
    rules: &DialogueRules,
) -> AgentTurn {
    for g in gists {
        memory.insert(g.clone());
    }
    if let Some(q) = gists.iter().find(|g| g.kind == GistKind::Question) {
        let text = first_output(rules.answer_trees_for(&q.key), rules, &q.text)
            .unwrap_or_else(|| rules.prompts.fallback_answer.clone());
        return AgentTurn {
            text,
            provenance: Provenance::Answer,
            gists: vec![q.text.clone()],
            asked: None,
        };
    }
    for s in gists.iter().filter(|g| g.kind == GistKind::Statement) {
        if let Some(text) = first_output(rules.reaction_trees_for(&s.key), rules, &s.text) {
            return AgentTurn {
                text,
                provenance: Provenance::Reaction,
                gists: vec![s.text.clone()],
                asked: None,
            };
        }
    }
    AgentTurn {
        text: rules.prompts.fallback.clone(),
        provenance: Provenance::Prompt,
        gists: gists.iter().map(|g| g.text.clone()).collect(),
        asked: None,
    }
}
