use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::pattern::{match_pattern, AnnotatedUtterance, Pattern, PatternError, DEFAULT_GAP_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TreeKind {
    Gist,
    Reaction,
    Answer,
}

impl FromStr for TreeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gist" => Ok(TreeKind::Gist),
            "reaction" => Ok(TreeKind::Reaction),
            "answer" => Ok(TreeKind::Answer),
            other => Err(format!("unknown tree kind {other:?}")),
        }
    }
}

impl fmt::Display for TreeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TreeKind::Gist => "gist",
            TreeKind::Reaction => "reaction",
            TreeKind::Answer => "answer",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TemplatePart {
    Word(String),
    /// 1-based index into the captures collected along the matched path.
    Slot(usize),
}

/// Output template of a leaf. An optional `[key]` prefix in the source
/// overrides the context key the output is filed under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub key: Option<String>,
    pub parts: Vec<TemplatePart>,
}

impl Template {
    pub fn parse(src: &str) -> Result<Self, String> {
        let mut rest = src.trim();
        let mut key = None;
        if let Some(after) = rest.strip_prefix('[') {
            let (k, tail) = after
                .split_once(']')
                .ok_or_else(|| format!("unterminated key in template {src:?}"))?;
            let k = k.trim();
            if k.is_empty() {
                return Err("empty template key".into());
            }
            key = Some(k.to_string());
            rest = tail;
        }
        let mut parts = Vec::new();
        for item in rest.split_whitespace() {
            if let Some(n) = item.strip_prefix('$') {
                // Trailing punctuation may follow a slot: `$1.`
                let digits = n.len() - n.trim_start_matches(|c: char| c.is_ascii_digit()).len();
                let (num, tail) = n.split_at(digits);
                let idx: usize = num
                    .parse()
                    .map_err(|_| format!("bad slot reference {item:?}"))?;
                if idx == 0 {
                    return Err("slot references start at $1".into());
                }
                if !tail.chars().all(|c| matches!(c, '?' | '.' | ',' | '!')) {
                    return Err(format!("bad slot reference {item:?}"));
                }
                parts.push(TemplatePart::Slot(idx));
                if !tail.is_empty() {
                    parts.push(TemplatePart::Word(tail.to_string()));
                }
            } else {
                parts.push(TemplatePart::Word(item.to_string()));
            }
        }
        if parts.is_empty() {
            return Err("empty template".into());
        }
        Ok(Template { key, parts })
    }

    fn max_slot(&self) -> usize {
        self.parts
            .iter()
            .filter_map(|p| match p {
                TemplatePart::Slot(i) => Some(*i),
                TemplatePart::Word(_) => None,
            })
            .max()
            .unwrap_or(0)
    }

    fn render(&self, captured: &[String]) -> String {
        let mut pieces: Vec<&str> = Vec::new();
        for part in &self.parts {
            match part {
                TemplatePart::Word(w) => pieces.push(w),
                TemplatePart::Slot(i) => pieces.push(&captured[i - 1]),
            }
        }
        join_words(pieces.iter().flat_map(|p| p.split_whitespace()))
    }
}

/// Joins words with single spaces, attaching sentence punctuation to the
/// preceding word.
pub fn join_words<'a>(words: impl IntoIterator<Item = &'a str>) -> String {
    let mut out = String::new();
    for w in words {
        let is_punct = !w.is_empty() && w.chars().all(|c| matches!(c, '?' | '.' | ',' | '!'));
        if !out.is_empty() && !is_punct {
            out.push(' ');
        }
        out.push_str(w);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeBody {
    Children(Vec<Node>),
    Outputs(Vec<Template>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub pattern: Pattern,
    pub body: NodeBody,
}

/// One output reached by [`TransductionTree::transduce`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub text: String,
    pub key: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransductionTree {
    pub kind: TreeKind,
    /// Context key the tree applies to; `None` for the catch-all tree.
    pub context: Option<String>,
    pub roots: Vec<Node>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Pattern {
        line: usize,
        #[source]
        source: PatternError,
    },
    #[error("line {line}: slot ${slot} but only {available} captures on the path")]
    UnboundSlot {
        line: usize,
        slot: usize,
        available: usize,
    },
}

impl TransductionTree {
    /// Depth-first transduction. At each level the first node whose pattern
    /// matches is descended into and its siblings are ignored; a leaf emits
    /// one output per template. Captures accumulate along the path, so
    /// `$n` counts across all patterns from the top level down.
    pub fn transduce(&self, input: &AnnotatedUtterance) -> Vec<Output> {
        let mut captured = Vec::new();
        let mut level = &self.roots;
        loop {
            let Some((node, result)) = level.iter().find_map(|n| {
                let r = match_pattern(&n.pattern, input);
                r.matched.then_some((n, r))
            }) else {
                return Vec::new();
            };
            captured.extend(result.captures.iter().map(|s| input.text(*s)));
            match &node.body {
                NodeBody::Children(children) => level = children,
                NodeBody::Outputs(templates) => {
                    return templates
                        .iter()
                        .map(|t| Output {
                            text: t.render(&captured),
                            key: t.key.clone(),
                        })
                        .collect();
                }
            }
        }
    }

    /// Convenience wrapper returning only output texts.
    pub fn transduce_texts(&self, input: &AnnotatedUtterance) -> Vec<String> {
        self.transduce(input).into_iter().map(|o| o.text).collect()
    }

    pub fn parse(src: &str, kind: TreeKind) -> Result<Self, TreeError> {
        let mut set = parse_trees(src, Some(kind))?;
        match set.len() {
            0 => Ok(TransductionTree {
                kind,
                context: None,
                roots: Vec::new(),
            }),
            1 => Ok(set.remove(0)),
            _ => Err(TreeError::Syntax {
                line: 1,
                message: "expected a single tree".into(),
            }),
        }
    }
}

struct PendingNode {
    indent: usize,
    line: usize,
    pattern: Pattern,
    children: Vec<Node>,
    outputs: Vec<(usize, Template)>,
}

/// Parses a rule file holding one or more trees.
///
/// ```text
/// tree gist free-time
/// pattern: * play * @GAME *
///   out: user spends free time playing $3 $4
/// ```
///
/// A `tree <kind> [context]` header starts a new tree. Lines before any
/// header belong to an unnamed tree of `default_kind`.
pub fn parse_trees(
    src: &str,
    default_kind: Option<TreeKind>,
) -> Result<Vec<TransductionTree>, TreeError> {
    let mut trees = Vec::new();
    let mut current: Option<TransductionTree> = default_kind.map(|kind| TransductionTree {
        kind,
        context: None,
        roots: Vec::new(),
    });
    let mut stack: Vec<PendingNode> = Vec::new();

    for (idx, raw) in src.lines().enumerate() {
        let line_no = idx + 1;
        let without_comment = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        if without_comment.trim().is_empty() {
            continue;
        }
        if without_comment.contains('\t') {
            return Err(TreeError::Syntax {
                line: line_no,
                message: "tabs are not allowed for indentation".into(),
            });
        }
        let indent = without_comment.len() - without_comment.trim_start().len();
        let line = without_comment.trim();

        if let Some(header) = line.strip_prefix("tree ") {
            close_to(&mut stack, 0, &mut current)?;
            if let Some(done) = current.take() {
                if !done.roots.is_empty() || done.context.is_some() {
                    trees.push(done);
                }
            }
            let mut parts = header.split_whitespace();
            let kind: TreeKind = parts
                .next()
                .ok_or("missing tree kind".to_string())
                .and_then(str::parse)
                .map_err(|message| TreeError::Syntax {
                    line: line_no,
                    message,
                })?;
            let context = parts.next().map(str::to_string);
            current = Some(TransductionTree {
                kind,
                context,
                roots: Vec::new(),
            });
            continue;
        }

        if current.is_none() {
            return Err(TreeError::Syntax {
                line: line_no,
                message: "rule before any `tree` header".into(),
            });
        }

        if let Some(p) = line.strip_prefix("pattern:") {
            close_to(&mut stack, indent, &mut current)?;
            if let Some(parent) = stack.last() {
                if !parent.outputs.is_empty() {
                    return Err(TreeError::Syntax {
                        line: line_no,
                        message: "node has both outputs and child patterns".into(),
                    });
                }
            }
            let pattern = Pattern::parse(p, DEFAULT_GAP_CAP).map_err(|source| TreeError::Pattern {
                line: line_no,
                source,
            })?;
            stack.push(PendingNode {
                indent,
                line: line_no,
                pattern,
                children: Vec::new(),
                outputs: Vec::new(),
            });
        } else if let Some(t) = line.strip_prefix("out:") {
            close_to(&mut stack, indent, &mut current)?;
            let Some(parent) = stack.last_mut() else {
                return Err(TreeError::Syntax {
                    line: line_no,
                    message: "`out:` without an enclosing pattern".into(),
                });
            };
            if !parent.children.is_empty() {
                return Err(TreeError::Syntax {
                    line: line_no,
                    message: "node has both outputs and child patterns".into(),
                });
            }
            let template = Template::parse(t).map_err(|message| TreeError::Syntax {
                line: line_no,
                message,
            })?;
            parent.outputs.push((line_no, template));
        } else {
            return Err(TreeError::Syntax {
                line: line_no,
                message: format!("expected `pattern:` or `out:`, got {line:?}"),
            });
        }
    }
    close_to(&mut stack, 0, &mut current)?;
    if let Some(done) = current.take() {
        if !done.roots.is_empty() || done.context.is_some() || trees.is_empty() {
            trees.push(done);
        }
    }
    for tree in &trees {
        check_slots(&tree.roots, 0)?;
    }
    Ok(trees)
}

/// Pops every pending node indented at or beyond `indent`, attaching each
/// to its parent (or to the tree roots).
fn close_to(
    stack: &mut Vec<PendingNode>,
    indent: usize,
    tree: &mut Option<TransductionTree>,
) -> Result<(), TreeError> {
    while stack.last().is_some_and(|n| n.indent >= indent) {
        let pending = stack.pop().expect("checked non-empty");
        let body = if pending.outputs.is_empty() {
            if pending.children.is_empty() {
                return Err(TreeError::Syntax {
                    line: pending.line,
                    message: "pattern has neither children nor outputs".into(),
                });
            }
            NodeBody::Children(pending.children)
        } else {
            NodeBody::Outputs(pending.outputs.into_iter().map(|(_, t)| t).collect())
        };
        let node = Node {
            pattern: pending.pattern,
            body,
        };
        match stack.last_mut() {
            Some(parent) => parent.children.push(node),
            None => tree
                .as_mut()
                .expect("tree exists while nodes are pending")
                .roots
                .push(node),
        }
    }
    Ok(())
}

fn check_slots(nodes: &[Node], inherited: usize) -> Result<(), TreeError> {
    for node in nodes {
        let available = inherited + node.pattern.capture_count();
        match &node.body {
            NodeBody::Children(children) => check_slots(children, available)?,
            NodeBody::Outputs(templates) => {
                for t in templates {
                    let slot = t.max_slot();
                    if slot > available {
                        return Err(TreeError::UnboundSlot {
                            line: 0,
                            slot,
                            available,
                        });
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transduction::lexicon::LexiconBuilder;
    use crate::transduction::pattern::annotate;
    use crate::transduction::FeatureLexicon;

    fn lexicon() -> FeatureLexicon {
        LexiconBuilder::new()
            .word("happy", ["GOODPRED"])
            .word("games", ["GAME"])
            .build()
            .unwrap()
    }

    #[test]
    fn one_node_tree_splices_capture() {
        let tree =
            TransductionTree::parse("pattern: *0-10 @GOODPRED *0-10\n  out: user feels $2\n", TreeKind::Gist)
                .unwrap();
        let out = tree.transduce_texts(&annotate("i am happy", &lexicon()));
        assert_eq!(out, vec!["user feels happy"]);
    }

    #[test]
    fn no_match_gives_empty_output() {
        let tree = TransductionTree::parse("pattern: * @GOODPRED *\n  out: user feels $2\n", TreeKind::Gist)
            .unwrap();
        assert!(tree.transduce(&annotate("zxqv", &lexicon())).is_empty());
    }

    #[test]
    fn first_matching_sibling_wins() {
        let src = "pattern: * @GOODPRED *\n  out: first\npattern: * happy *\n  out: second\n";
        let tree = TransductionTree::parse(src, TreeKind::Reaction).unwrap();
        assert_eq!(
            tree.transduce_texts(&annotate("so happy", &lexicon())),
            vec!["first"]
        );
    }

    #[test]
    fn nested_captures_number_along_path() {
        let src = "\
tree gist free-time
pattern: * @GAME *
  pattern: * play * @GAME *
    out: [hobby] user spends free time playing $5 $6
    out: user likes $2
";
        let trees = parse_trees(src, None).unwrap();
        assert_eq!(trees.len(), 1);
        assert_eq!(trees[0].context.as_deref(), Some("free-time"));
        let out = trees[0].transduce(&annotate("I mostly play video games", &lexicon()));
        assert_eq!(
            out,
            vec![
                Output {
                    text: "user spends free time playing video games".into(),
                    key: Some("hobby".into())
                },
                Output {
                    text: "user likes games".into(),
                    key: None
                }
            ]
        );
    }

    #[test]
    fn committed_descent_does_not_backtrack() {
        let src = "pattern: * @GAME *\n  pattern: chess\n    out: chess\npattern: *\n  out: catch-all\n";
        let err = TransductionTree::parse(src, TreeKind::Gist);
        // `*` alone is only gaps; use a literal catch-all instead.
        assert!(err.is_err());
        let src = "pattern: * @GAME *\n  pattern: chess\n    out: chess\npattern: * games\n  out: catch-all\n";
        let tree = TransductionTree::parse(src, TreeKind::Gist).unwrap();
        assert!(tree.transduce(&annotate("video games", &lexicon())).is_empty());
    }

    #[test]
    fn punctuation_attaches_in_output() {
        let tree =
            TransductionTree::parse("pattern: what about you\n  out: what about you ?\n", TreeKind::Gist)
                .unwrap();
        assert_eq!(
            tree.transduce_texts(&annotate("what about you ?", &lexicon())),
            vec!["what about you?"]
        );
    }

    #[test]
    fn slot_may_carry_trailing_punctuation() {
        let tree = TransductionTree::parse("pattern: i play @GAME\n  out: Nice, $1!\n", TreeKind::Reaction)
            .unwrap();
        assert_eq!(tree.transduce_texts(&annotate("i play games", &lexicon())), vec!["Nice, games!"]);
        assert!(Template::parse("$1x").is_err());
    }

    #[test]
    fn unbound_slot_rejected() {
        let err = TransductionTree::parse("pattern: hello *\n  out: $3\n", TreeKind::Gist).unwrap_err();
        assert!(matches!(err, TreeError::UnboundSlot { slot: 3, available: 1, .. }));
    }

    #[test]
    fn structural_errors() {
        let mixed = "pattern: a\n  out: x\n  pattern: b\n    out: y\n";
        assert!(TransductionTree::parse(mixed, TreeKind::Gist).is_err());
        let childless = "pattern: a\n";
        assert!(TransductionTree::parse(childless, TreeKind::Gist).is_err());
        let orphan = "out: x\n";
        assert!(TransductionTree::parse(orphan, TreeKind::Gist).is_err());
        assert!(parse_trees("pattern: a\n  out: x\n", None).is_err());
        assert!(parse_trees("tree bogus\n", None).is_err());
    }

    #[test]
    fn multiple_trees_in_one_file() {
        let src = "tree gist\npattern: a\n  out: x\ntree reaction movies\npattern: b\n  out: y\n";
        let trees = parse_trees(src, None).unwrap();
        assert_eq!(trees.len(), 2);
        assert_eq!(trees[0].kind, TreeKind::Gist);
        assert_eq!(trees[0].context, None);
        assert_eq!(trees[1].kind, TreeKind::Reaction);
        assert_eq!(trees[1].context.as_deref(), Some("movies"));
    }
}
