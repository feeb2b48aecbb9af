//! Append-only JSON-lines log of session events.
//!
//! Presentations are a pure function of the posterior, so only creations and
//! choices are logged; replaying them rebuilds every session exactly.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::ServiceError;
use crate::session::SessionConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Record {
    Create { id: String, config: SessionConfig },
    Choice { id: String, episode: u64, index: usize },
}

#[derive(Debug)]
pub struct Store {
    path: PathBuf,
    file: File,
}

impl Store {
    /// Opens (creating if needed) the log and returns it with its existing records.
    pub fn open(path: &Path) -> Result<(Self, Vec<Record>), ServiceError> {
        let io = |e: std::io::Error| ServiceError::Internal(format!("{}: {e}", path.display()));
        let mut records = Vec::new();
        if path.exists() {
            let reader = BufReader::new(File::open(path).map_err(io)?);
            for (n, line) in reader.lines().enumerate() {
                let line = line.map_err(io)?;
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str(&line) {
                    Ok(r) => records.push(r),
                    // A torn final line from a crash is dropped; anything else is corruption.
                    Err(_) if is_last_line(path, n) => break,
                    Err(e) => {
                        return Err(ServiceError::Internal(format!(
                            "{}:{}: {e}",
                            path.display(),
                            n + 1
                        )))
                    }
                }
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
        Ok((Self { path: path.to_owned(), file }, records))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&mut self, record: &Record) -> Result<(), ServiceError> {
        let mut line = serde_json::to_string(record).map_err(|e| ServiceError::Internal(e.to_string()))?;
        line.push('\n');
        self.file
            .write_all(line.as_bytes())
            .and_then(|_| self.file.sync_data())
            .map_err(|e| ServiceError::Internal(format!("{}: {e}", self.path.display())))
    }
}

fn is_last_line(path: &Path, n: usize) -> bool {
    std::fs::read_to_string(path)
        .map(|s| s.lines().count() == n + 1)
        .unwrap_or(false)
}
