//! Running sessions, each confined to its own task. Client messages and
//! subscriptions for a session go through one ordered inbox, so every
//! subscriber sees every output produced after it joined, in order.

use std::collections::HashMap;
use std::io::{self, Write};
use std::sync::{Arc, Mutex};

use confab::dialogue::DialogueRules;
use confab::feedback::HmmModel;
use tokio::sync::mpsc::{unbounded_channel, UnboundedReceiver, UnboundedSender};

use crate::config::SessionConfig;
use crate::protocol::{ClientMessage, ServerMessage};
use crate::record::{DataDir, RecordError, RecordedSession};
use crate::session::SessionError;

enum Command {
    Client(ClientMessage),
    Subscribe(UnboundedSender<ServerMessage>),
}

pub struct Hub {
    rules: Arc<DialogueRules>,
    model: Arc<HmmModel>,
    data: Option<DataDir>,
    defaults: SessionConfig,
    sessions: Mutex<HashMap<String, UnboundedSender<Command>>>,
}

type Sink = Box<dyn Write + Send>;

impl Hub {
    /// Sessions are recorded under `data` when given.
    pub fn new(
        rules: Arc<DialogueRules>,
        model: Arc<HmmModel>,
        defaults: SessionConfig,
        data: Option<DataDir>,
    ) -> Self {
        Hub {
            rules,
            model,
            data,
            defaults,
            sessions: Mutex::new(HashMap::new()),
        }
    }

    pub fn data_dir(&self) -> Option<&DataDir> {
        self.data.as_ref()
    }

    /// Starts a session whose first subscriber is `first`, which also gets
    /// the opening turn. Must be called inside a tokio runtime.
    pub fn create(
        self: &Arc<Self>,
        id: &str,
        config: Option<SessionConfig>,
        first: UnboundedSender<ServerMessage>,
    ) -> Result<(), RecordError> {
        let config = config.unwrap_or_else(|| self.defaults.clone());
        let sink: Sink = match &self.data {
            Some(dir) => Box::new(dir.create(id)?),
            None => Box::new(io::sink()),
        };
        let (mut session, opening) =
            RecordedSession::start(id, config, self.rules.clone(), self.model.clone(), sink)?;
        let (tx, mut rx) = unbounded_channel::<Command>();
        self.sessions
            .lock()
            .expect("hub lock")
            .insert(id.to_string(), tx);
        for msg in opening {
            let _ = first.send(msg);
        }
        let hub = Arc::clone(self);
        let id = id.to_string();
        tokio::spawn(async move {
            let mut subscribers = vec![first];
            while let Some(cmd) = rx.recv().await {
                match cmd {
                    Command::Subscribe(s) => subscribers.push(s),
                    Command::Client(msg) => {
                        let outputs = match session.handle(&msg) {
                            Ok(out) => out,
                            Err(e) => {
                                tracing::error!(session = %id, "record write failed: {e}");
                                break;
                            }
                        };
                        for out in &outputs {
                            subscribers.retain(|s| s.send(out.clone()).is_ok());
                        }
                        if session.session().is_ended() {
                            break;
                        }
                    }
                }
            }
            let _ = session.flush();
            hub.sessions.lock().expect("hub lock").remove(&id);
            tracing::info!(session = %id, "session closed");
        });
        Ok(())
    }

    fn inbox(&self, id: &str) -> Result<UnboundedSender<Command>, SessionError> {
        self.sessions
            .lock()
            .expect("hub lock")
            .get(id)
            .cloned()
            .ok_or_else(|| SessionError::UnknownSession(id.into()))
    }

    pub fn send(&self, id: &str, msg: ClientMessage) -> Result<(), SessionError> {
        self.inbox(id)?
            .send(Command::Client(msg))
            .map_err(|_| SessionError::UnknownSession(id.into()))
    }

    pub fn subscribe(&self, id: &str) -> Result<UnboundedReceiver<ServerMessage>, SessionError> {
        let (tx, rx) = unbounded_channel();
        self.inbox(id)?
            .send(Command::Subscribe(tx))
            .map_err(|_| SessionError::UnknownSession(id.into()))?;
        Ok(rx)
    }

    pub fn is_running(&self, id: &str) -> bool {
        self.sessions.lock().expect("hub lock").contains_key(id)
    }
}
