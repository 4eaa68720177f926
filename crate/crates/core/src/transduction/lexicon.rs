use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A semantic or syntactic feature tag such as `GOODPRED`.
///
/// Tags are case-insensitive; they are stored upper-cased.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tag(String);

impl Tag {
    pub fn new(name: &str) -> Self {
        Tag(name.trim().to_uppercase())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Tag {
    fn from(s: &str) -> Self {
        Tag::new(s)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LexiconError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("feature hierarchy cycle: {}", chain.iter().map(Tag::as_str).collect::<Vec<_>>().join(" < "))]
    CycleDetected { chain: Vec<Tag> },
    #[error("word {word:?} has more than one entry")]
    DuplicateWordEntry { word: String },
    #[error("parent tag {parent} of {child} is never declared")]
    UndeclaredParentTag { child: Tag, parent: Tag },
}

/// Word to feature mapping plus the feature hierarchy.
///
/// Built through [`LexiconBuilder`] or [`FeatureLexicon::parse`]; both
/// check that the hierarchy is acyclic and precompute each word's closure.
#[derive(Debug, Clone, Default)]
pub struct FeatureLexicon {
    word_features: BTreeMap<String, BTreeSet<Tag>>,
    feature_parents: BTreeMap<Tag, BTreeSet<Tag>>,
    closures: BTreeMap<String, BTreeSet<Tag>>,
}

static EMPTY: BTreeSet<Tag> = BTreeSet::new();

impl FeatureLexicon {
    /// Parses the line-oriented lexicon format:
    ///
    /// ```text
    /// # comment
    /// happy : GOODPRED
    /// linguistics : SOCIAL-SCIENCE
    /// SOCIAL-SCIENCE < ACADEMIC-SUBJECT
    /// ACADEMIC-SUBJECT <
    /// ```
    ///
    /// A `TAG <` line with no parents declares a root tag.
    pub fn parse(source: &str) -> Result<Self, LexiconError> {
        let mut builder = LexiconBuilder::default();
        for (idx, raw) in source.lines().enumerate() {
            let line_no = idx + 1;
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            if let Some((lhs, rhs)) = line.split_once('<') {
                let tag = lhs.trim();
                if !is_tag_name(tag) {
                    return Err(LexiconError::Syntax {
                        line: line_no,
                        message: format!("bad tag name {tag:?}"),
                    });
                }
                let parents = split_tags(rhs, line_no)?;
                builder.add_parents(tag, parents.iter().map(String::as_str));
            } else if let Some((lhs, rhs)) = line.split_once(':') {
                let word = lhs.trim().to_lowercase();
                if word.is_empty() || word.contains(char::is_whitespace) {
                    return Err(LexiconError::Syntax {
                        line: line_no,
                        message: format!("bad word {word:?}"),
                    });
                }
                let tags = split_tags(rhs, line_no)?;
                builder.try_add_word(&word, tags.iter().map(String::as_str))?;
            } else {
                return Err(LexiconError::Syntax {
                    line: line_no,
                    message: "expected `word : TAGS` or `TAG < PARENTS`".into(),
                });
            }
        }
        builder.build()
    }

    /// Direct plus inherited features of `word`; unknown words have none.
    pub fn lookup(&self, word: &str) -> &BTreeSet<Tag> {
        match self.closures.get(word) {
            Some(set) => set,
            None => self
                .closures
                .get(word.to_lowercase().as_str())
                .unwrap_or(&EMPTY),
        }
    }

    /// Tags attached to `word` in the source, before inheritance.
    pub fn direct_features(&self, word: &str) -> &BTreeSet<Tag> {
        self.word_features.get(word).unwrap_or(&EMPTY)
    }

    pub fn parents(&self, tag: &Tag) -> &BTreeSet<Tag> {
        self.feature_parents.get(tag).unwrap_or(&EMPTY)
    }

    /// Transitive closure of a tag set under the parent relation.
    pub fn closure_of<'a, I>(&self, tags: I) -> BTreeSet<Tag>
    where
        I: IntoIterator<Item = &'a Tag>,
    {
        let mut out = BTreeSet::new();
        let mut stack: Vec<&Tag> = tags.into_iter().collect();
        while let Some(tag) = stack.pop() {
            if out.insert(tag.clone()) {
                stack.extend(self.parents(tag));
            }
        }
        out
    }

    pub fn is_declared(&self, tag: &Tag) -> bool {
        self.feature_parents.contains_key(tag)
    }

    pub fn word_count(&self) -> usize {
        self.word_features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word_features.is_empty() && self.feature_parents.is_empty()
    }
}

#[derive(Debug, Default)]
pub struct LexiconBuilder {
    word_features: BTreeMap<String, BTreeSet<Tag>>,
    feature_parents: BTreeMap<Tag, BTreeSet<Tag>>,
    duplicate: Option<String>,
}

impl LexiconBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a word entry. A second entry for the same word is reported by
    /// [`build`](Self::build).
    pub fn word<'a>(mut self, word: &str, tags: impl IntoIterator<Item = &'a str>) -> Self {
        if let Err(LexiconError::DuplicateWordEntry { word }) = self.try_add_word(word, tags) {
            self.duplicate.get_or_insert(word);
        }
        self
    }

    pub fn parents<'a>(mut self, tag: &str, parents: impl IntoIterator<Item = &'a str>) -> Self {
        self.add_parents(tag, parents);
        self
    }

    fn try_add_word<'a>(
        &mut self,
        word: &str,
        tags: impl IntoIterator<Item = &'a str>,
    ) -> Result<(), LexiconError> {
        let word = word.to_lowercase();
        if self.word_features.contains_key(&word) {
            return Err(LexiconError::DuplicateWordEntry { word });
        }
        let tags: BTreeSet<Tag> = tags.into_iter().map(Tag::new).collect();
        for tag in &tags {
            self.feature_parents.entry(tag.clone()).or_default();
        }
        self.word_features.insert(word, tags);
        Ok(())
    }

    fn add_parents<'a>(&mut self, tag: &str, parents: impl IntoIterator<Item = &'a str>) {
        let entry = self.feature_parents.entry(Tag::new(tag)).or_default();
        entry.extend(parents.into_iter().map(Tag::new));
    }

    pub fn build(self) -> Result<FeatureLexicon, LexiconError> {
        if let Some(word) = self.duplicate {
            return Err(LexiconError::DuplicateWordEntry { word });
        }
        for (child, parents) in &self.feature_parents {
            for parent in parents {
                if !self.feature_parents.contains_key(parent) {
                    return Err(LexiconError::UndeclaredParentTag {
                        child: child.clone(),
                        parent: parent.clone(),
                    });
                }
            }
        }
        check_acyclic(&self.feature_parents)?;

        let mut lexicon = FeatureLexicon {
            word_features: self.word_features,
            feature_parents: self.feature_parents,
            closures: BTreeMap::new(),
        };
        let closures = lexicon
            .word_features
            .iter()
            .map(|(w, tags)| (w.clone(), lexicon.closure_of(tags)))
            .collect();
        lexicon.closures = closures;
        Ok(lexicon)
    }
}

fn check_acyclic(parents: &BTreeMap<Tag, BTreeSet<Tag>>) -> Result<(), LexiconError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    fn visit<'a>(
        tag: &'a Tag,
        parents: &'a BTreeMap<Tag, BTreeSet<Tag>>,
        marks: &mut BTreeMap<&'a Tag, Mark>,
        path: &mut Vec<&'a Tag>,
    ) -> Result<(), LexiconError> {
        match marks.get(tag) {
            Some(Mark::Done) => return Ok(()),
            Some(Mark::Open) => {
                let start = path.iter().position(|t| *t == tag).unwrap_or(0);
                let mut chain: Vec<Tag> = path[start..].iter().map(|t| (*t).clone()).collect();
                chain.push(tag.clone());
                return Err(LexiconError::CycleDetected { chain });
            }
            None => {}
        }
        marks.insert(tag, Mark::Open);
        path.push(tag);
        if let Some(ps) = parents.get(tag) {
            for p in ps {
                visit(p, parents, marks, path)?;
            }
        }
        path.pop();
        marks.insert(tag, Mark::Done);
        Ok(())
    }

    let mut marks = BTreeMap::new();
    for tag in parents.keys() {
        visit(tag, parents, &mut marks, &mut Vec::new())?;
    }
    Ok(())
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn is_tag_name(s: &str) -> bool {
    !s.is_empty()
        && s
            .chars()
            .all(|c| c.is_alphanumeric() || c == '-' || c == '_')
}

fn split_tags(list: &str, line: usize) -> Result<Vec<String>, LexiconError> {
    let mut out = Vec::new();
    for part in list.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        if !is_tag_name(part) {
            return Err(LexiconError::Syntax {
                line,
                message: format!("bad tag name {part:?}"),
            });
        }
        out.push(part.to_string());
    }
    Ok(out)
}
