use std::collections::HashMap;
use std::path::Path;
use std::sync::{Arc, Mutex, RwLock};

use crate::error::ServiceError;
use crate::session::{ChoiceResult, History, Presentation, Session, SessionConfig};
use crate::store::{Record, Store};

/// All live sessions plus the optional persistent log.
///
/// Each session sits behind its own lock, so requests for one id are
/// serialised while different sessions proceed independently.
#[derive(Debug, Default)]
pub struct SessionManager {
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    store: Option<Mutex<Store>>,
}

impl SessionManager {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens the log at `path` and replays it.
    pub fn open(path: &Path) -> Result<Self, ServiceError> {
        let (store, records) = Store::open(path)?;
        let mut sessions = HashMap::new();
        for record in records {
            match record {
                Record::Create { id, config } => {
                    let s = Session::new(id.clone(), config)?;
                    sessions.insert(id, s);
                }
                Record::Choice { id, episode, index } => {
                    let s = sessions
                        .get_mut(&id)
                        .ok_or_else(|| ServiceError::Internal(format!("log references unknown session {id}")))?;
                    if s.episode() + 1 != episode {
                        return Err(ServiceError::Internal(format!("log out of order for session {id}")));
                    }
                    s.next_options(false)?;
                    s.submit_choice(index)?;
                }
            }
        }
        Ok(Self {
            sessions: RwLock::new(
                sessions
                    .into_iter()
                    .map(|(k, v)| (k, Arc::new(Mutex::new(v))))
                    .collect(),
            ),
            store: Some(Mutex::new(store)),
        })
    }

    fn log(&self, record: &Record) -> Result<(), ServiceError> {
        match &self.store {
            Some(store) => store.lock().expect("store lock").append(record),
            None => Ok(()),
        }
    }

    fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, ServiceError> {
        self.sessions
            .read()
            .expect("sessions lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::NotFound(id.to_owned()))
    }

    pub fn create(&self, config: SessionConfig) -> Result<String, ServiceError> {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let session = Session::new(id.clone(), config.clone())?;
        self.log(&Record::Create { id: id.clone(), config })?;
        self.sessions
            .write()
            .expect("sessions lock")
            .insert(id.clone(), Arc::new(Mutex::new(session)));
        Ok(id)
    }

    pub fn ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.sessions.read().expect("sessions lock").keys().cloned().collect();
        ids.sort();
        ids
    }

    pub fn next_options(&self, id: &str, front_only: bool) -> Result<Presentation, ServiceError> {
        self.get(id)?.lock().expect("session lock").next_options(front_only)
    }

    /// Submits a choice. When `episode` names the last completed episode and
    /// the index matches, the stored result is returned instead of playing again.
    pub fn submit_choice(&self, id: &str, index: usize, episode: Option<u64>) -> Result<ChoiceResult, ServiceError> {
        let session = self.get(id)?;
        let mut s = session.lock().expect("session lock");
        if let Some(ep) = episode {
            let done = s.episode();
            if ep >= 1 && ep <= done {
                let entry = &s.entries()[ep as usize - 1];
                if entry.chosen == index {
                    return Ok(s.result_of(ep as usize - 1));
                }
                return Err(ServiceError::Conflict(format!(
                    "episode {ep} was already answered with {}",
                    entry.chosen
                )));
            }
            if ep != done + 1 {
                return Err(ServiceError::Conflict(format!("next episode is {}, not {ep}", done + 1)));
            }
        }
        self.play(&mut s, index)
    }

    fn play(&self, s: &mut Session, index: usize) -> Result<ChoiceResult, ServiceError> {
        // Validate against a copy first so a failed log write leaves the session untouched.
        let mut next = s.clone();
        let result = next.submit_choice(index)?;
        self.log(&Record::Choice {
            id: s.id().to_owned(),
            episode: result.episode,
            index,
        })?;
        *s = next;
        Ok(result)
    }

    /// Lets the scripted oracle play up to `steps` episodes.
    pub fn advance(&self, id: &str, steps: u64) -> Result<Vec<ChoiceResult>, ServiceError> {
        let session = self.get(id)?;
        let mut s = session.lock().expect("session lock");
        let mut out = Vec::new();
        for _ in 0..steps.max(1) {
            if !out.is_empty() && s.status() == crate::session::Status::Finished {
                break;
            }
            let index = s.oracle_choice()?;
            out.push(self.play(&mut s, index)?);
        }
        Ok(out)
    }

    pub fn history(&self, id: &str) -> Result<History, ServiceError> {
        Ok(self.get(id)?.lock().expect("session lock").history())
    }

    /// A snapshot of the session state.
    pub fn snapshot(&self, id: &str) -> Result<Session, ServiceError> {
        Ok(self.get(id)?.lock().expect("session lock").clone())
    }
}
