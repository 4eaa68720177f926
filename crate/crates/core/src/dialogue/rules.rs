use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::transduction::{
    parse_trees, FeatureLexicon, LexiconError, TransductionTree, TreeError, TreeKind,
};

use super::schema::{SchemaError, SchemaLibrary};

/// Context key of the gist tree tried first in every context.
pub const ANY_CONTEXT: &str = "any";

#[derive(Debug, Error)]
pub enum RulesError {
    #[error("lexicon: {0}")]
    Lexicon(#[from] LexiconError),
    #[error("{file}: {source}")]
    Tree {
        file: String,
        #[source]
        source: TreeError,
    },
    #[error("{file}: expected only `{expected}` trees, found `{found}`")]
    WrongKind {
        file: String,
        expected: TreeKind,
        found: TreeKind,
    },
    #[error("schemas: {0}")]
    Schema(#[from] SchemaError),
    #[error("prompts line {line}: {message}")]
    Prompts { line: usize, message: String },
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Fixed lines the agent falls back on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prompts {
    /// Said when nothing in the user's turn was understood.
    pub fallback: String,
    /// Said when the user asked something no answer rule covers.
    pub fallback_answer: String,
    /// Nudge for users giving very short answers.
    pub elaborate: String,
    /// Said once after the last topic.
    pub closing: String,
}

impl Default for Prompts {
    fn default() -> Self {
        Prompts {
            fallback: "I see.".into(),
            fallback_answer: "That's a good question. I haven't really thought about it.".into(),
            elaborate: "Could you tell me a little more about that?".into(),
            closing: "It was really nice talking with you.".into(),
        }
    }
}

impl Prompts {
    /// `name: text` lines; unknown names are errors, missing ones keep
    /// their defaults.
    pub fn parse(source: &str) -> Result<Self, RulesError> {
        let mut p = Prompts::default();
        for (idx, raw) in source.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| RulesError::Prompts {
                line: idx + 1,
                message,
            };
            let (name, text) = line
                .split_once(':')
                .ok_or_else(|| err("expected `name: text`".into()))?;
            let text = text.trim().to_string();
            if text.is_empty() {
                return Err(err(format!("empty prompt {name:?}")));
            }
            match name.trim() {
                "fallback" => p.fallback = text,
                "fallback-answer" => p.fallback_answer = text,
                "elaborate" => p.elaborate = text,
                "closing" => p.closing = text,
                other => return Err(err(format!("unknown prompt {other:?}"))),
            }
        }
        Ok(p)
    }
}

/// Lexicon, transduction trees, schemas and prompts for one agent. Shared
/// read-only between sessions.
#[derive(Debug, Clone)]
pub struct DialogueRules {
    pub lexicon: FeatureLexicon,
    pub gist: Vec<TransductionTree>,
    pub reaction: Vec<TransductionTree>,
    pub answer: Vec<TransductionTree>,
    pub schemas: SchemaLibrary,
    pub prompts: Prompts,
}

const SHIPPED_LEXICON: &str = include_str!("../../assets/lexicon.txt");
const SHIPPED_GIST: &str = include_str!("../../assets/gist.rules");
const SHIPPED_REACTION: &str = include_str!("../../assets/reaction.rules");
const SHIPPED_ANSWER: &str = include_str!("../../assets/answer.rules");
const SHIPPED_SCHEMAS: &str = include_str!("../../assets/schemas.txt");
const SHIPPED_PROMPTS: &str = include_str!("../../assets/prompts.txt");

/// File names looked up by [`DialogueRules::load_dir`].
pub const RULE_FILES: [&str; 6] = [
    "lexicon.txt",
    "gist.rules",
    "reaction.rules",
    "answer.rules",
    "schemas.txt",
    "prompts.txt",
];

impl DialogueRules {
    /// The rule set compiled into the library.
    pub fn shipped() -> Self {
        Self::from_sources(
            SHIPPED_LEXICON,
            SHIPPED_GIST,
            SHIPPED_REACTION,
            SHIPPED_ANSWER,
            SHIPPED_SCHEMAS,
            SHIPPED_PROMPTS,
        )
        .expect("shipped rules are valid")
    }

    pub fn from_sources(
        lexicon: &str,
        gist: &str,
        reaction: &str,
        answer: &str,
        schemas: &str,
        prompts: &str,
    ) -> Result<Self, RulesError> {
        Ok(DialogueRules {
            lexicon: FeatureLexicon::parse(lexicon)?,
            gist: trees("gist.rules", gist, TreeKind::Gist)?,
            reaction: trees("reaction.rules", reaction, TreeKind::Reaction)?,
            answer: trees("answer.rules", answer, TreeKind::Answer)?,
            schemas: SchemaLibrary::parse(schemas)?,
            prompts: Prompts::parse(prompts)?,
        })
    }

    /// Loads the files named in [`RULE_FILES`] from `dir`.
    pub fn load_dir(dir: &Path) -> Result<Self, RulesError> {
        let read = |name: &str| {
            let path = dir.join(name);
            fs::read_to_string(&path).map_err(|source| RulesError::Io {
                path: path.display().to_string(),
                source,
            })
        };
        Self::from_sources(
            &read(RULE_FILES[0])?,
            &read(RULE_FILES[1])?,
            &read(RULE_FILES[2])?,
            &read(RULE_FILES[3])?,
            &read(RULE_FILES[4])?,
            &read(RULE_FILES[5])?,
        )
    }

    /// Gist trees in the order they are tried: the `any` tree, the context's
    /// own tree, then the catch-all.
    pub fn gist_trees_for(&self, context: Option<&str>) -> Vec<&TransductionTree> {
        let mut out: Vec<&TransductionTree> = self
            .gist
            .iter()
            .filter(|t| t.context.as_deref() == Some(ANY_CONTEXT))
            .collect();
        if let Some(ctx) = context {
            out.extend(self.gist.iter().filter(|t| t.context.as_deref() == Some(ctx)));
        }
        out.extend(self.gist.iter().filter(|t| t.context.is_none()));
        out
    }

    pub fn reaction_trees_for(&self, key: &str) -> Vec<&TransductionTree> {
        keyed_then_general(&self.reaction, key)
    }

    pub fn answer_trees_for(&self, key: &str) -> Vec<&TransductionTree> {
        keyed_then_general(&self.answer, key)
    }
}

fn keyed_then_general<'a>(trees: &'a [TransductionTree], key: &str) -> Vec<&'a TransductionTree> {
    let mut out: Vec<&TransductionTree> = trees
        .iter()
        .filter(|t| t.context.as_deref() == Some(key))
        .collect();
    out.extend(trees.iter().filter(|t| t.context.is_none()));
    out
}

fn trees(file: &str, src: &str, kind: TreeKind) -> Result<Vec<TransductionTree>, RulesError> {
    let parsed = parse_trees(src, None).map_err(|source| RulesError::Tree {
        file: file.to_string(),
        source,
    })?;
    if let Some(bad) = parsed.iter().find(|t| t.kind != kind) {
        return Err(RulesError::WrongKind {
            file: file.to_string(),
            expected: kind,
            found: bad.kind,
        });
    }
    Ok(parsed)
}
