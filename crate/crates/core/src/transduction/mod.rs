//! Feature annotation and hierarchical pattern transduction.
//!
//! Words are annotated with the transitive closure of their lexicon
//! features; patterns of literals, feature classes and bounded gaps are
//! matched against whole utterances; trees of patterns rewrite matched
//! input into output templates.

mod lexicon;
mod pattern;
mod tree;

pub use lexicon::{FeatureLexicon, LexiconBuilder, LexiconError, Tag};
pub use pattern::{
    annotate, match_pattern, tokenize, AnnotatedUtterance, MatchResult, Pattern, PatternElement,
    PatternError, Span, Token, DEFAULT_GAP_CAP,
};
pub use tree::{
    join_words, parse_trees, Node, NodeBody, Output, Template, TemplatePart, TransductionTree,
    TreeError, TreeKind,
};
