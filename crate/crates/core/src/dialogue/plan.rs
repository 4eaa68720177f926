use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::transduction::{AnnotatedUtterance, Tag};

use super::gist::GistMemory;
use super::schema::{Guard, Schema, SchemaEvent, SchemaLibrary};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlannedEvent {
    pub event: SchemaEvent,
    /// 0 for topic schemas, parent depth + 1 for spliced subschemas.
    pub depth: usize,
    pub schema: String,
}

/// One agent utterance produced while advancing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Utterance {
    pub text: String,
    /// Context key for questions, `None` for remarks.
    pub asks: Option<String>,
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Step {
    pub emitted: Vec<Utterance>,
    /// Key of the answer now awaited; `None` once the plan has run out.
    pub waiting: Option<String>,
}

/// Normal end of the plan, not a fault.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("dialogue plan exhausted")]
pub struct PlanExhausted;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopicError {
    #[error("no topics remaining")]
    NoTopicsRemaining,
    #[error("unknown topic {0:?}")]
    UnknownTopic(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopicEntry {
    pub schema: String,
    pub label: String,
    pub category: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Engagement {
    pub words: usize,
    pub turns: usize,
}

impl Engagement {
    pub fn mean(&self) -> Option<f64> {
        (self.turns > 0).then(|| self.words as f64 / self.turns as f64)
    }
}

/// Flattened conversation plan. The cursor never moves backwards; topics
/// and subschemas are appended or spliced ahead of it.
#[derive(Debug, Clone, Default)]
pub struct DialoguePlan {
    events: Vec<PlannedEvent>,
    cursor: usize,
    topics: Vec<TopicEntry>,
    visited: Vec<usize>,
    engagement: BTreeMap<String, Engagement>,
}

impl DialoguePlan {
    /// A plan over `order`, given as schema ids or topic labels. No topic
    /// is started yet.
    pub fn new(library: &SchemaLibrary, order: &[String]) -> Result<Self, TopicError> {
        let topics = order
            .iter()
            .map(|name| {
                let s = library
                    .find(name)
                    .ok_or_else(|| TopicError::UnknownTopic(name.clone()))?;
                Ok(TopicEntry {
                    schema: s.id.clone(),
                    label: s.topic.clone(),
                    category: s.category.clone(),
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(DialoguePlan {
            topics,
            ..Default::default()
        })
    }

    /// A plan holding just `schema`'s events.
    pub fn from_schema(schema: &Schema) -> Self {
        let mut plan = DialoguePlan {
            topics: vec![TopicEntry {
                schema: schema.id.clone(),
                label: schema.topic.clone(),
                category: schema.category.clone(),
            }],
            ..Default::default()
        };
        plan.start(0, schema);
        plan
    }

    fn start(&mut self, index: usize, schema: &Schema) {
        self.visited.push(index);
        self.events.extend(schema.events.iter().map(|e| PlannedEvent {
            event: e.clone(),
            depth: 0,
            schema: schema.id.clone(),
        }));
    }

    /// Appends the topic chosen by [`DialoguePlan::select_next_topic`].
    pub fn start_next_topic(
        &mut self,
        library: &SchemaLibrary,
        indifference_below: f64,
    ) -> Result<&TopicEntry, TopicError> {
        let index = self.next_topic_index(indifference_below)?;
        let schema = library
            .get(&self.topics[index].schema)
            .ok_or_else(|| TopicError::UnknownTopic(self.topics[index].schema.clone()))?;
        self.start(index, schema);
        Ok(&self.topics[index])
    }

    fn next_topic_index(&self, indifference_below: f64) -> Result<usize, TopicError> {
        let unvisited = (0..self.topics.len()).filter(|i| !self.visited.contains(i));
        let (keen, indifferent): (Vec<usize>, Vec<usize>) = unvisited.partition(|&i| {
            !self
                .engagement
                .get(&self.topics[i].category)
                .and_then(Engagement::mean)
                .is_some_and(|m| m < indifference_below)
        });
        keen.into_iter()
            .chain(indifferent)
            .next()
            .ok_or(TopicError::NoTopicsRemaining)
    }

    /// The next unvisited topic in configured order, except that topics in
    /// a category where the user averaged fewer than `indifference_below`
    /// words per turn go last.
    pub fn select_next_topic(&self, indifference_below: f64) -> Result<&TopicEntry, TopicError> {
        self.next_topic_index(indifference_below)
            .map(|i| &self.topics[i])
    }

    pub fn current_topic(&self) -> Option<&TopicEntry> {
        self.visited.last().map(|&i| &self.topics[i])
    }

    pub fn visited_topics(&self) -> impl Iterator<Item = &TopicEntry> {
        self.visited.iter().map(|&i| &self.topics[i])
    }

    pub fn topics(&self) -> &[TopicEntry] {
        &self.topics
    }

    pub fn has_unvisited_topics(&self) -> bool {
        self.visited.len() < self.topics.len()
    }

    /// Counts a user turn towards the current topic's category.
    pub fn record_turn(&mut self, words: usize) {
        if let Some(topic) = self.current_topic() {
            let e = self.engagement.entry(topic.category.clone()).or_default();
            e.words += words;
            e.turns += 1;
        }
    }

    pub fn engagement(&self) -> &BTreeMap<String, Engagement> {
        &self.engagement
    }

    /// Overrides the accumulator for `category`.
    pub fn set_engagement(&mut self, category: &str, engagement: Engagement) {
        self.engagement.insert(category.to_string(), engagement);
    }

    pub fn events(&self) -> &[PlannedEvent] {
        &self.events
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn is_exhausted(&self) -> bool {
        self.cursor >= self.events.len()
    }

    /// Key of the answer the plan is waiting for.
    pub fn waiting_for(&self) -> Option<&str> {
        match self.events.get(self.cursor).map(|e| &e.event) {
            Some(SchemaEvent::ExpectUser { key }) => Some(key),
            _ => None,
        }
    }

    /// Moves past the awaited answer (if any) and runs forward to the next
    /// `expect`. Questions already answered in `memory` are skipped together
    /// with their `expect`. Subschemas whose guard holds for `last_turn` or
    /// `memory` are spliced in at the cursor one level deeper.
    pub fn advance(
        &mut self,
        library: &SchemaLibrary,
        memory: &GistMemory,
        last_turn: Option<&AnnotatedUtterance>,
    ) -> Result<Step, PlanExhausted> {
        if self.is_exhausted() {
            return Err(PlanExhausted);
        }
        if self.waiting_for().is_some() {
            self.cursor += 1;
        }
        let mut step = Step::default();
        while let Some(planned) = self.events.get(self.cursor) {
            let depth = planned.depth;
            match planned.event.clone() {
                SchemaEvent::AgentSay { text } => {
                    step.emitted.push(Utterance {
                        text,
                        asks: None,
                        depth,
                    });
                    self.cursor += 1;
                }
                SchemaEvent::AgentAsk { text, key, .. } => {
                    if memory.has_statement(&key) {
                        self.cursor = self.matching_expect(&key) + 1;
                    } else {
                        step.emitted.push(Utterance {
                            text,
                            asks: Some(key),
                            depth,
                        });
                        self.cursor += 1;
                    }
                }
                SchemaEvent::ExpectUser { key } => {
                    step.waiting = Some(key);
                    return Ok(step);
                }
                SchemaEvent::InsertSubschema { schema, guard } => {
                    self.cursor += 1;
                    let holds = match &guard {
                        Guard::Tag(t) => last_turn.is_some_and(|u| u.has_feature(&Tag::new(t))),
                        Guard::GistKey(k) => memory.has_statement(k),
                    };
                    if let (true, Some(sub)) = (holds, library.get(&schema)) {
                        let spliced: Vec<PlannedEvent> = sub
                            .events
                            .iter()
                            .map(|e| PlannedEvent {
                                event: e.clone(),
                                depth: depth + 1,
                                schema: sub.id.clone(),
                            })
                            .collect();
                        self.events.splice(self.cursor..self.cursor, spliced);
                    }
                }
            }
        }
        Ok(step)
    }

    fn matching_expect(&self, key: &str) -> usize {
        self.events[self.cursor..]
            .iter()
            .position(|e| matches!(&e.event, SchemaEvent::ExpectUser { key: k } if k == key))
            .map(|p| self.cursor + p)
            .unwrap_or(self.events.len() - 1)
    }
}
