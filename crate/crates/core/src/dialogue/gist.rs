use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::transduction::{annotate, join_words, tokenize, AnnotatedUtterance};

use super::rules::DialogueRules;

/// Key under which gists are filed when no question is in force.
pub const GENERAL_KEY: &str = "general";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GistKind {
    Statement,
    Question,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GistClause {
    pub text: String,
    pub kind: GistKind,
    pub key: String,
    pub turn: usize,
}

impl GistClause {
    /// Builds a clause from raw transducer output. The kind follows from a
    /// trailing question mark. Returns `None` for text with no words.
    pub fn new(text: &str, key: &str, turn: usize) -> Option<GistClause> {
        let text = display_form(text)?;
        let kind = if text.ends_with('?') {
            GistKind::Question
        } else {
            GistKind::Statement
        };
        Some(GistClause {
            text,
            kind,
            key: key.to_string(),
            turn,
        })
    }

    pub fn canonical(&self) -> String {
        canonical_gist(&self.text)
    }
}

/// Lowercased words joined by single spaces, punctuation removed. Two gists
/// with the same canonical form are the same gist.
pub fn canonical_gist(text: &str) -> String {
    tokenize(text).join(" ")
}

fn display_form(text: &str) -> Option<String> {
    let words = tokenize(text);
    if words.is_empty() {
        return None;
    }
    let mut out = join_words(words.iter().map(String::as_str));
    if text.trim_end().ends_with('?') {
        out.push('?');
    }
    Some(out)
}

/// Everything the user has told the agent, deduplicated.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GistMemory {
    seen: BTreeSet<String>,
    by_key: BTreeMap<String, Vec<GistClause>>,
}

impl GistMemory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stores `gist` unless its canonical form is already known. Returns
    /// whether anything was added.
    pub fn insert(&mut self, gist: GistClause) -> bool {
        let canonical = gist.canonical();
        if !self.seen.insert(canonical) {
            return false;
        }
        self.by_key.entry(gist.key.clone()).or_default().push(gist);
        true
    }

    pub fn contains(&self, text: &str) -> bool {
        self.seen.contains(&canonical_gist(text))
    }

    pub fn under(&self, key: &str) -> &[GistClause] {
        self.by_key.get(key).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Whether the user has already supplied information for `key`.
    pub fn has_statement(&self, key: &str) -> bool {
        self.under(key).iter().any(|g| g.kind == GistKind::Statement)
    }

    pub fn len(&self) -> usize {
        self.seen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seen.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &GistClause> {
        self.by_key.values().flatten()
    }
}

/// Gist extraction for one sentence. The `any` tree runs first, then the
/// tree for the question in force, then the unnamed tree. The first tree
/// producing output wins.
pub fn extract_gist(
    rules: &DialogueRules,
    input: &AnnotatedUtterance,
    context: Option<&str>,
    turn: usize,
) -> Vec<GistClause> {
    if input.is_empty() {
        return Vec::new();
    }
    let key = context.unwrap_or(GENERAL_KEY);
    for tree in rules.gist_trees_for(context) {
        let outputs = tree.transduce(input);
        if outputs.is_empty() {
            continue;
        }
        return outputs
            .iter()
            .filter_map(|o| GistClause::new(&o.text, o.key.as_deref().unwrap_or(key), turn))
            .collect();
    }
    Vec::new()
}

/// Splits raw user text into sentences and extracts gists from each. A
/// sentence ending in `?` that no rule recognized still yields a question
/// gist made of its own words.
pub fn extract_gists_from_text(
    rules: &DialogueRules,
    text: &str,
    context: Option<&str>,
    turn: usize,
) -> Vec<GistClause> {
    let mut out: Vec<GistClause> = Vec::new();
    for (sentence, asked) in sentences(text) {
        let input = annotate(sentence, &rules.lexicon);
        let mut found = extract_gist(rules, &input, context, turn);
        if asked && !found.iter().any(|g| g.kind == GistKind::Question) {
            let key = context.unwrap_or(GENERAL_KEY);
            let words: Vec<&str> = input.words().collect();
            found.extend(GistClause::new(&format!("{}?", words.join(" ")), key, turn));
        }
        for g in found {
            if !out.iter().any(|o| o.canonical() == g.canonical()) {
                out.push(g);
            }
        }
    }
    out
}

fn sentences(text: &str) -> Vec<(&str, bool)> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, c) in text.char_indices() {
        if matches!(c, '.' | '!' | '?' | ';') {
            out.push((&text[start..i], c == '?'));
            start = i + c.len_utf8();
        }
    }
    out.push((&text[start..], false));
    out.retain(|(s, _)| !tokenize(s).is_empty());
    out
}
