//! Live practice sessions on top of the `confab` engine: segment clock,
//! wire protocol, append-only records with replay, scripted simulation,
//! a broadcast hub and a websocket server.

pub mod config;
pub mod hub;
pub mod protocol;
pub mod record;
pub mod server;
pub mod session;
pub mod sim;

pub use config::{ModelSource, Segment, SegmentKind, SessionConfig, DEFAULT_SEGMENTS};
pub use protocol::{ClientMessage, SegmentReport, ServerMessage};
pub use record::{replay, DataDir, RecordError, RecordedSession, SessionRecord, DATA_DIR_ENV};
pub use session::{load_model, Session, SessionError};
pub use sim::{simulate, Script, SimOutcome, TurnLog};
