use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

/// What a subschema insertion is conditioned on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Guard {
    /// A feature tag carried by some word of the last user turn.
    Tag(String),
    /// A statement gist filed under this context key.
    GistKey(String),
}

impl Guard {
    fn parse(src: &str) -> Guard {
        let is_tag = src.chars().any(|c| c.is_ascii_uppercase())
            && src
                .chars()
                .all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '-' || c == '_');
        if is_tag {
            Guard::Tag(src.to_string())
        } else {
            Guard::GistKey(src.to_string())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SchemaEvent {
    AgentSay {
        text: String,
    },
    AgentAsk {
        id: String,
        text: String,
        key: String,
    },
    ExpectUser {
        key: String,
    },
    InsertSubschema {
        schema: String,
        guard: Guard,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    pub id: String,
    pub topic: String,
    /// Topics sharing a category share an engagement score.
    pub category: String,
    pub events: Vec<SchemaEvent>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SchemaError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("schema {0:?} defined twice")]
    DuplicateSchema(String),
    #[error("schema {schema:?} inserts unknown subschema {target:?}")]
    UnresolvedSubschema { schema: String, target: String },
    #[error("schema {schema:?} asks {key:?} but never expects an answer")]
    DanglingAsk { schema: String, key: String },
    #[error("subschema cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
    #[error("no schema named {0:?}")]
    UnknownSchema(String),
    #[error("source holds no schema")]
    Empty,
}

/// A validated set of schemas, in file order.
#[derive(Debug, Clone, Default)]
pub struct SchemaLibrary {
    schemas: BTreeMap<String, Schema>,
    order: Vec<String>,
}

impl SchemaLibrary {
    /// Parses one or more schemas:
    ///
    /// ```text
    /// schema free-time
    /// topic: free time
    /// category: leisure
    /// say: Let's talk about hobbies.
    /// ask free-time: What do you do in your free time?
    /// expect free-time
    /// sub games if GAME
    /// ```
    ///
    /// `topic` and `category` default to the schema id.
    pub fn parse(source: &str) -> Result<Self, SchemaError> {
        let mut lib = SchemaLibrary::default();
        let mut current: Option<Schema> = None;
        for (idx, raw) in source.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let syntax = |message: String| SchemaError::Syntax {
                line: line_no,
                message,
            };
            if let Some(id) = line.strip_prefix("schema ") {
                if let Some(done) = current.take() {
                    lib.insert(done)?;
                }
                let id = id.trim();
                if id.is_empty() || id.contains(char::is_whitespace) {
                    return Err(syntax(format!("bad schema id {id:?}")));
                }
                current = Some(Schema {
                    id: id.to_string(),
                    topic: id.to_string(),
                    category: id.to_string(),
                    events: Vec::new(),
                });
                continue;
            }
            let schema = current
                .as_mut()
                .ok_or_else(|| syntax("event before any `schema` header".into()))?;
            let (head, body) = match line.split_once(':') {
                Some((h, b)) => (h.trim(), Some(b.trim())),
                None => (line, None),
            };
            let mut words = head.split_whitespace();
            let keyword = words.next().unwrap_or_default();
            let arg: Vec<&str> = words.collect();
            let text = |what: &str| -> Result<String, SchemaError> {
                match body {
                    Some(b) if !b.is_empty() => Ok(b.to_string()),
                    _ => Err(syntax(format!("`{what}` needs text after ':'"))),
                }
            };
            match (keyword, arg.as_slice()) {
                ("topic", []) => schema.topic = text("topic")?,
                ("category", []) => schema.category = text("category")?,
                ("say", []) => schema.events.push(SchemaEvent::AgentSay { text: text("say")? }),
                ("ask", [key]) => {
                    let n = schema
                        .events
                        .iter()
                        .filter(|e| matches!(e, SchemaEvent::AgentAsk { .. }))
                        .count();
                    schema.events.push(SchemaEvent::AgentAsk {
                        id: format!("{}#{}", schema.id, n + 1),
                        text: text("ask")?,
                        key: key.to_string(),
                    });
                }
                ("expect", [key]) if body.is_none() => schema.events.push(SchemaEvent::ExpectUser {
                    key: key.to_string(),
                }),
                ("sub", [target, "if", guard]) if body.is_none() => {
                    schema.events.push(SchemaEvent::InsertSubschema {
                        schema: target.to_string(),
                        guard: Guard::parse(guard),
                    })
                }
                _ => return Err(syntax(format!("unrecognized line {line:?}"))),
            }
        }
        if let Some(done) = current.take() {
            lib.insert(done)?;
        }
        lib.validate()?;
        Ok(lib)
    }

    fn insert(&mut self, schema: Schema) -> Result<(), SchemaError> {
        if self.schemas.contains_key(&schema.id) {
            return Err(SchemaError::DuplicateSchema(schema.id));
        }
        self.order.push(schema.id.clone());
        self.schemas.insert(schema.id.clone(), schema);
        Ok(())
    }

    fn validate(&self) -> Result<(), SchemaError> {
        for schema in self.schemas.values() {
            for (i, event) in schema.events.iter().enumerate() {
                match event {
                    SchemaEvent::AgentAsk { key, .. } => {
                        let answered = schema.events[i + 1..].iter().any(
                            |e| matches!(e, SchemaEvent::ExpectUser { key: k } if k == key),
                        );
                        if !answered {
                            return Err(SchemaError::DanglingAsk {
                                schema: schema.id.clone(),
                                key: key.clone(),
                            });
                        }
                    }
                    SchemaEvent::InsertSubschema { schema: target, .. }
                        if !self.schemas.contains_key(target) =>
                    {
                        return Err(SchemaError::UnresolvedSubschema {
                            schema: schema.id.clone(),
                            target: target.clone(),
                        });
                    }
                    _ => {}
                }
            }
        }
        let mut done = BTreeSet::new();
        for id in &self.order {
            let mut path = Vec::new();
            self.find_cycle(id, &mut path, &mut done)?;
        }
        Ok(())
    }

    fn find_cycle(
        &self,
        id: &str,
        path: &mut Vec<String>,
        done: &mut BTreeSet<String>,
    ) -> Result<(), SchemaError> {
        if let Some(pos) = path.iter().position(|p| p == id) {
            let mut chain = path[pos..].to_vec();
            chain.push(id.to_string());
            return Err(SchemaError::Cycle(chain));
        }
        if done.contains(id) {
            return Ok(());
        }
        path.push(id.to_string());
        for event in &self.schemas[id].events {
            if let SchemaEvent::InsertSubschema { schema, .. } = event {
                self.find_cycle(schema, path, done)?;
            }
        }
        path.pop();
        done.insert(id.to_string());
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&Schema> {
        self.schemas.get(id)
    }

    /// Looks a schema up by id or by topic label.
    pub fn find(&self, id_or_topic: &str) -> Option<&Schema> {
        self.schemas.get(id_or_topic).or_else(|| {
            self.order
                .iter()
                .map(|id| &self.schemas[id])
                .find(|s| s.topic == id_or_topic)
        })
    }

    /// Schemas in file order.
    pub fn iter(&self) -> impl Iterator<Item = &Schema> {
        self.order.iter().map(|id| &self.schemas[id])
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// Parses `source` and returns its first schema; any further schemas in
/// the source serve as its subschemas during validation.
pub fn load_schema(source: &str) -> Result<Schema, SchemaError> {
    let lib = SchemaLibrary::parse(source)?;
    let first = lib.order.first().ok_or(SchemaError::Empty)?;
    Ok(lib.schemas[first].clone())
}
