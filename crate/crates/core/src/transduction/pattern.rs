use std::collections::{BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

use super::lexicon::{FeatureLexicon, Tag};

/// Largest gap width a pattern may declare unless configured otherwise.
pub const DEFAULT_GAP_CAP: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub word: String,
    pub features: BTreeSet<Tag>,
}

/// A tokenized utterance whose tokens carry their full feature closure.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnnotatedUtterance {
    pub tokens: Vec<Token>,
}

impl AnnotatedUtterance {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.word.as_str())
    }

    /// Space-joined words of `span`.
    pub fn text(&self, span: Span) -> String {
        self.tokens[span.start..span.end]
            .iter()
            .map(|t| t.word.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn has_feature(&self, tag: &Tag) -> bool {
        self.tokens.iter().any(|t| t.features.contains(tag))
    }
}

/// Lowercases and splits on whitespace and punctuation. Apostrophes and
/// hyphens survive inside a word (`don't`, `sci-fi`).
pub fn tokenize(text: &str) -> Vec<String> {
    let cleaned: String = text
        .chars()
        .map(|c| {
            if c.is_alphanumeric() || c == '\'' || c == '-' {
                c
            } else {
                ' '
            }
        })
        .collect();
    cleaned
        .split_whitespace()
        .map(|w| w.trim_matches(|c| c == '\'' || c == '-').to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

pub fn annotate(utterance: &str, lexicon: &FeatureLexicon) -> AnnotatedUtterance {
    let tokens = tokenize(utterance)
        .into_iter()
        .map(|word| {
            let features = lexicon.lookup(&word).clone();
            Token { word, features }
        })
        .collect();
    AnnotatedUtterance { tokens }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternElement {
    Literal(String),
    Class(Tag),
    Gap { min: usize, max: usize },
}

impl PatternElement {
    fn captures(&self) -> bool {
        !matches!(self, PatternElement::Literal(_))
    }
}

impl fmt::Display for PatternElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternElement::Literal(w) => f.write_str(w),
            PatternElement::Class(t) => write!(f, "@{t}"),
            PatternElement::Gap { min, max } => write!(f, "*{min}-{max}"),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PatternError {
    #[error("pattern has no literal or class element")]
    OnlyGaps,
    #[error("gap bounds {min}-{max} invalid (cap {cap})")]
    BadGap { min: usize, max: usize, cap: usize },
    #[error("cannot parse pattern element {0:?}")]
    BadElement(String),
}

/// A sequence of literal words, feature classes and bounded gaps that must
/// cover an entire utterance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    elements: Vec<PatternElement>,
}

impl Pattern {
    pub fn new(elements: Vec<PatternElement>) -> Result<Self, PatternError> {
        Self::with_cap(elements, DEFAULT_GAP_CAP)
    }

    pub fn with_cap(elements: Vec<PatternElement>, cap: usize) -> Result<Self, PatternError> {
        if !elements
            .iter()
            .any(|e| !matches!(e, PatternElement::Gap { .. }))
        {
            return Err(PatternError::OnlyGaps);
        }
        for e in &elements {
            if let PatternElement::Gap { min, max } = *e {
                if max < min || max > cap {
                    return Err(PatternError::BadGap { min, max, cap });
                }
            }
        }
        Ok(Pattern { elements })
    }

    /// Parses a space-separated element list:
    /// `*` is a gap of 0 to `cap` tokens, `+` a gap of 1 to `cap`,
    /// `*N-M` an explicit gap, `@TAG` a feature class, anything else a
    /// literal word.
    pub fn parse(src: &str, cap: usize) -> Result<Self, PatternError> {
        let mut elements = Vec::new();
        for item in src.split_whitespace() {
            let element = if item == "*" {
                PatternElement::Gap { min: 0, max: cap }
            } else if item == "+" {
                PatternElement::Gap { min: 1, max: cap }
            } else if let Some(range) = item.strip_prefix('*') {
                let (lo, hi) = range
                    .split_once('-')
                    .ok_or_else(|| PatternError::BadElement(item.into()))?;
                let min = lo.parse().map_err(|_| PatternError::BadElement(item.into()))?;
                let max = hi.parse().map_err(|_| PatternError::BadElement(item.into()))?;
                PatternElement::Gap { min, max }
            } else if let Some(tag) = item.strip_prefix('@') {
                if tag.is_empty() {
                    return Err(PatternError::BadElement(item.into()));
                }
                PatternElement::Class(Tag::new(tag))
            } else {
                let words = tokenize(item);
                match words.as_slice() {
                    [w] => PatternElement::Literal(w.clone()),
                    _ => return Err(PatternError::BadElement(item.into())),
                }
            };
            elements.push(element);
        }
        Self::with_cap(elements, cap)
    }

    pub fn elements(&self) -> &[PatternElement] {
        &self.elements
    }

    /// Number of capture positions (one per class or gap element).
    pub fn capture_count(&self) -> usize {
        self.elements.iter().filter(|e| e.captures()).count()
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.elements.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

/// Half-open token range `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MatchResult {
    pub matched: bool,
    pub captures: Vec<Span>,
}

impl MatchResult {
    fn failed() -> Self {
        Self::default()
    }
}

/// Matches `pattern` against the whole of `input`.
///
/// Gaps are tried shortest first, left to right, so the returned assignment
/// is the one whose vector of gap widths is lexicographically smallest.
pub fn match_pattern(pattern: &Pattern, input: &AnnotatedUtterance) -> MatchResult {
    let mut matcher = Matcher {
        elements: &pattern.elements,
        input,
        dead: HashSet::new(),
        captures: Vec::with_capacity(pattern.capture_count()),
    };
    if matcher.step(0, 0) {
        MatchResult {
            matched: true,
            captures: matcher.captures,
        }
    } else {
        MatchResult::failed()
    }
}

struct Matcher<'a> {
    elements: &'a [PatternElement],
    input: &'a AnnotatedUtterance,
    // (element index, token position) pairs known not to complete.
    dead: HashSet<(usize, usize)>,
    captures: Vec<Span>,
}

impl Matcher<'_> {
    fn step(&mut self, elem: usize, pos: usize) -> bool {
        let n = self.input.tokens.len();
        if elem == self.elements.len() {
            return pos == n;
        }
        if self.dead.contains(&(elem, pos)) {
            return false;
        }
        let ok = match &self.elements[elem] {
            PatternElement::Literal(word) => {
                pos < n && self.input.tokens[pos].word == *word && self.step(elem + 1, pos + 1)
            }
            PatternElement::Class(tag) => {
                if pos < n && self.input.tokens[pos].features.contains(tag) {
                    self.captures.push(Span {
                        start: pos,
                        end: pos + 1,
                    });
                    if self.step(elem + 1, pos + 1) {
                        true
                    } else {
                        self.captures.pop();
                        false
                    }
                } else {
                    false
                }
            }
            &PatternElement::Gap { min, max } => {
                let mut found = false;
                for width in min..=max {
                    if pos + width > n {
                        break;
                    }
                    self.captures.push(Span {
                        start: pos,
                        end: pos + width,
                    });
                    if self.step(elem + 1, pos + width) {
                        found = true;
                        break;
                    }
                    self.captures.pop();
                }
                found
            }
        };
        if !ok {
            self.dead.insert((elem, pos));
        }
        ok
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transduction::lexicon::LexiconBuilder;

    fn lexicon() -> FeatureLexicon {
        LexiconBuilder::new()
            .word("happy", ["GOODPRED"])
            .word("glad", ["GOODPRED"])
            .word("linguistics", ["SOCIAL-SCIENCE"])
            .parents("SOCIAL-SCIENCE", ["ACADEMIC-SUBJECT"])
            .parents("ACADEMIC-SUBJECT", [])
            .build()
            .unwrap()
    }

    fn texts(input: &AnnotatedUtterance, r: &MatchResult) -> Vec<String> {
        r.captures.iter().map(|s| input.text(*s)).collect()
    }

    #[test]
    fn tokenizer_strips_punctuation_and_case() {
        assert_eq!(
            tokenize("Well, I DON'T know... sci-fi?"),
            vec!["well", "i", "don't", "know", "sci-fi"]
        );
        assert!(tokenize("  ?! ").is_empty());
    }

    #[test]
    fn annotate_examples() {
        let lex = lexicon();
        let a = annotate("happy", &lex);
        assert_eq!(a.tokens.len(), 1);
        assert_eq!(a.tokens[0].features, [Tag::new("GOODPRED")].into());

        let a = annotate("linguistics", &lex);
        assert_eq!(
            a.tokens[0].features,
            [Tag::new("SOCIAL-SCIENCE"), Tag::new("ACADEMIC-SUBJECT")].into()
        );

        let a = annotate("zxqv", &lex);
        assert_eq!(a.tokens[0].word, "zxqv");
        assert!(a.tokens[0].features.is_empty());

        assert!(annotate("", &lex).is_empty());
    }

    #[test]
    fn gap_class_gap() {
        let lex = lexicon();
        let input = annotate("i am happy today", &lex);
        let p = Pattern::parse("*0-10 @GOODPRED *0-10", 10).unwrap();
        let r = match_pattern(&p, &input);
        assert!(r.matched);
        assert_eq!(texts(&input, &r), vec!["i am", "happy", "today"]);
    }

    #[test]
    fn literal_match_and_mismatch() {
        let lex = lexicon();
        let p = Pattern::parse("hello", 10).unwrap();
        let r = match_pattern(&p, &annotate("hello", &lex));
        assert!(r.matched);
        assert!(r.captures.is_empty());
        let r = match_pattern(&p, &annotate("goodbye", &lex));
        assert!(!r.matched);
        assert!(r.captures.is_empty());
    }

    #[test]
    fn leftmost_shortest_gap_wins() {
        let lex = lexicon();
        let input = annotate("happy and glad and happy", &lex);
        let p = Pattern::parse("* @GOODPRED *", 10).unwrap();
        let r = match_pattern(&p, &input);
        assert_eq!(texts(&input, &r), vec!["", "happy", "and glad and happy"]);
    }

    #[test]
    fn pattern_must_cover_whole_utterance() {
        let lex = lexicon();
        let p = Pattern::parse("i @GOODPRED", 10).unwrap();
        assert!(!match_pattern(&p, &annotate("i happy now", &lex)).matched);
        let p = Pattern::parse("*0-1 happy", 10).unwrap();
        assert!(!match_pattern(&p, &annotate("so very happy", &lex)).matched);
    }

    #[test]
    fn pattern_validation() {
        assert_eq!(Pattern::parse("* *", 10), Err(PatternError::OnlyGaps));
        assert!(matches!(
            Pattern::parse("*3-2 a", 10),
            Err(PatternError::BadGap { .. })
        ));
        assert!(matches!(
            Pattern::parse("*0-11 a", 10),
            Err(PatternError::BadGap { .. })
        ));
        assert!(matches!(Pattern::parse("@", 10), Err(PatternError::BadElement(_))));
        let p = Pattern::parse("+ likes @GOODPRED", 10).unwrap();
        assert_eq!(p.to_string(), "*1-10 likes @GOODPRED");
        assert_eq!(p.capture_count(), 2);
    }
}
