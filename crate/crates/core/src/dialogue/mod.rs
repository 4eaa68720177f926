//! Schema-driven conversation: plans built from topic schemas, gist
//! extraction and reactions through transduction trees, and a memory that
//! keeps the agent from asking for what it already knows.

mod conversation;
mod gist;
mod plan;
mod reaction;
mod rules;
mod schema;
mod verbosity;

pub use conversation::{Conversation, DialogueConfig, DEFAULT_TOPICS};
pub use gist::{
    canonical_gist, extract_gist, extract_gists_from_text, GistClause, GistKind, GistMemory,
    GENERAL_KEY,
};
pub use plan::{
    DialoguePlan, Engagement, PlanExhausted, PlannedEvent, Step, TopicEntry, TopicError, Utterance,
};
pub use reaction::{generate_reaction, AgentTurn, Provenance};
pub use rules::{DialogueRules, Prompts, RulesError, ANY_CONTEXT, RULE_FILES};
pub use schema::{load_schema, Guard, Schema, SchemaError, SchemaEvent, SchemaLibrary};
pub use verbosity::{gauge_verbosity, VerbosityClass, VerbosityPolicy, VerbosityProfile};
