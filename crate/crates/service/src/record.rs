//! Append-only session records: one JSON object per line, a header followed
//! by every input and output in processing order.

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use confab::dialogue::DialogueRules;
use confab::feedback::HmmModel;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::SessionConfig;
use crate::protocol::{ClientMessage, ServerMessage};
use crate::session::{Session, SessionError};

/// Environment variable naming the data directory.
pub const DATA_DIR_ENV: &str = "CONFAB_DATA_DIR";
pub const DEFAULT_DATA_DIR: &str = "confab-data";
pub const RECORD_FORMAT: &str = "confab-session/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum RecordLine {
    Header {
        format: String,
        id: String,
        config: SessionConfig,
    },
    In {
        msg: ClientMessage,
    },
    Out {
        msg: ServerMessage,
    },
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{path} line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("no record for session {0:?}")]
    NotFound(String),
    #[error(transparent)]
    Session(#[from] SessionError),
}

/// A session together with its record. Errors are recorded as `error`
/// outputs so a replay reproduces them too.
pub struct RecordedSession<W: Write> {
    session: Session,
    out: W,
}

fn line(record: &RecordLine) -> String {
    serde_json::to_string(record).expect("records serialize")
}

impl<W: Write> RecordedSession<W> {
    pub fn start(
        id: &str,
        config: SessionConfig,
        rules: Arc<DialogueRules>,
        model: Arc<HmmModel>,
        mut out: W,
    ) -> Result<(Self, Vec<ServerMessage>), RecordError> {
        let header = RecordLine::Header {
            format: RECORD_FORMAT.into(),
            id: id.into(),
            config: config.clone(),
        };
        let (session, opening) = Session::new(id, config, rules, model)?;
        let io_err = |source| RecordError::Io {
            path: id.into(),
            source,
        };
        writeln!(out, "{}", line(&header)).map_err(io_err)?;
        let mut recorded = RecordedSession { session, out };
        recorded.write_outputs(&opening).map_err(io_err)?;
        Ok((recorded, opening))
    }

    fn write_outputs(&mut self, msgs: &[ServerMessage]) -> io::Result<()> {
        for msg in msgs {
            writeln!(self.out, "{}", line(&RecordLine::Out { msg: msg.clone() }))?;
        }
        Ok(())
    }

    pub fn handle(&mut self, msg: &ClientMessage) -> io::Result<Vec<ServerMessage>> {
        writeln!(self.out, "{}", line(&RecordLine::In { msg: msg.clone() }))?;
        let outputs = match self.session.handle(msg) {
            Ok(out) => out,
            Err(e) => vec![e.to_message()],
        };
        self.write_outputs(&outputs)?;
        if self.session.is_ended() {
            self.out.flush()?;
        }
        Ok(outputs)
    }

    pub fn session(&self) -> &Session {
        &self.session
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.out.flush()
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

/// Parsed contents of a record file.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionRecord {
    pub id: String,
    pub config: SessionConfig,
    pub inputs: Vec<ClientMessage>,
    pub outputs: Vec<ServerMessage>,
}

impl SessionRecord {
    pub fn parse(text: &str, origin: &str) -> Result<Self, RecordError> {
        let mut header = None;
        let mut inputs = Vec::new();
        let mut outputs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            if raw.trim().is_empty() {
                continue;
            }
            let parsed: RecordLine =
                serde_json::from_str(raw).map_err(|e| RecordError::Parse {
                    path: origin.into(),
                    line: idx + 1,
                    message: e.to_string(),
                })?;
            match parsed {
                RecordLine::Header { id, config, .. } if header.is_none() => {
                    header = Some((id, config))
                }
                RecordLine::Header { .. } => {
                    return Err(RecordError::Parse {
                        path: origin.into(),
                        line: idx + 1,
                        message: "second header".into(),
                    })
                }
                RecordLine::In { msg } => inputs.push(msg),
                RecordLine::Out { msg } => outputs.push(msg),
            }
        }
        let (id, config) = header.ok_or_else(|| RecordError::Parse {
            path: origin.into(),
            line: 1,
            message: "missing header".into(),
        })?;
        Ok(SessionRecord {
            id,
            config,
            inputs,
            outputs,
        })
    }

    /// The final summary, once the session has ended.
    pub fn summary(&self) -> Option<&ServerMessage> {
        self.outputs
            .iter()
            .rev()
            .find(|m| matches!(m, ServerMessage::Summary { .. }))
    }
}

/// Runs a record's inputs through a fresh session and returns the bytes of
/// the record that produces.
pub fn replay(record: &SessionRecord, rules: Arc<DialogueRules>) -> Result<Vec<u8>, RecordError> {
    let model = Arc::new(crate::session::load_model(&record.config.model).map_err(SessionError::from)?);
    let (mut session, _) =
        RecordedSession::start(&record.id, record.config.clone(), rules, model, Vec::new())?;
    for msg in &record.inputs {
        session.handle(msg).expect("writing to memory cannot fail");
    }
    Ok(session.into_inner())
}

/// Directory holding one `<id>.jsonl` record per session.
#[derive(Debug, Clone)]
pub struct DataDir {
    root: PathBuf,
}

impl DataDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        DataDir { root: root.into() }
    }

    /// `$CONFAB_DATA_DIR`, or `./confab-data`.
    pub fn from_env() -> Self {
        DataDir::new(std::env::var_os(DATA_DIR_ENV).unwrap_or_else(|| DEFAULT_DATA_DIR.into()))
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path_for(&self, id: &str) -> PathBuf {
        self.root.join(format!("{id}.jsonl"))
    }

    /// Opens a new record; fails if one with this id exists.
    pub fn create(&self, id: &str) -> Result<BufWriter<File>, RecordError> {
        self.open(id, false)
    }

    /// Opens a record, truncating any previous one with this id.
    pub fn replace(&self, id: &str) -> Result<BufWriter<File>, RecordError> {
        self.open(id, true)
    }

    fn open(&self, id: &str, truncate: bool) -> Result<BufWriter<File>, RecordError> {
        let path = self.path_for(id);
        let io_err = |source| RecordError::Io {
            path: path.display().to_string(),
            source,
        };
        fs::create_dir_all(&self.root).map_err(io_err)?;
        let mut options = OpenOptions::new();
        options.write(true);
        if truncate {
            options.create(true).truncate(true);
        } else {
            options.create_new(true);
        }
        Ok(BufWriter::new(options.open(&path).map_err(io_err)?))
    }

    pub fn read_bytes(&self, id: &str) -> Result<Vec<u8>, RecordError> {
        let path = self.path_for(id);
        fs::read(&path).map_err(|source| match source.kind() {
            io::ErrorKind::NotFound => RecordError::NotFound(id.into()),
            _ => RecordError::Io {
                path: path.display().to_string(),
                source,
            },
        })
    }

    pub fn load(&self, id: &str) -> Result<SessionRecord, RecordError> {
        let bytes = self.read_bytes(id)?;
        let text = String::from_utf8_lossy(&bytes);
        SessionRecord::parse(&text, &self.path_for(id).display().to_string())
    }

    /// Ids of all stored sessions, sorted.
    pub fn list(&self) -> Result<Vec<String>, RecordError> {
        let entries = match fs::read_dir(&self.root) {
            Ok(e) => e,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(source) => {
                return Err(RecordError::Io {
                    path: self.root.display().to_string(),
                    source,
                })
            }
        };
        let mut ids: Vec<String> = entries
            .filter_map(Result::ok)
            .filter_map(|e| {
                e.file_name()
                    .to_str()
                    .and_then(|n| n.strip_suffix(".jsonl"))
                    .map(str::to_string)
            })
            .collect();
        ids.sort();
        Ok(ids)
    }
}
