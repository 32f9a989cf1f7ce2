//! Append-only JSON-lines journal, one file per session. The first line
//! holds the creation request, every further line one delta. Reloading
//! recreates the session and replays the deltas in order.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use grefute_core::session::{Delta, Problem, Session, SessionError};
use grefute_core::Exec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum JournalError {
    #[error("journal {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("journal {path} line {line}: {message}")]
    Corrupt { path: PathBuf, line: usize, message: String },
    #[error("journal {path}: replay failed: {source}")]
    Replay { path: PathBuf, source: SessionError },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Entry {
    Create(Problem),
    Delta(Box<Delta>),
}

pub struct Journal {
    dir: PathBuf,
    /// Serializes appends across sessions; each line is one write.
    lock: Mutex<()>,
}

impl Journal {
    pub fn open(dir: PathBuf) -> Result<Journal, JournalError> {
        fs::create_dir_all(&dir).map_err(|source| JournalError::Io { path: dir.clone(), source })?;
        Ok(Journal { dir, lock: Mutex::new(()) })
    }

    fn path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.jsonl"))
    }

    fn write(&self, id: &str, entry: &Entry, create: bool) -> Result<(), JournalError> {
        let path = self.path(id);
        let _guard = self.lock.lock().expect("journal lock");
        let mut line = serde_json::to_string(entry).expect("entry serializes");
        line.push('\n');
        let mut opts = OpenOptions::new();
        if create {
            opts.write(true).create_new(true);
        } else {
            opts.append(true);
        }
        let mut f = opts.open(&path).map_err(|source| JournalError::Io { path: path.clone(), source })?;
        f.write_all(line.as_bytes()).and_then(|_| f.flush()).map_err(|source| JournalError::Io { path, source })
    }

    pub fn create(&self, id: &str, problem: &Problem) -> Result<(), JournalError> {
        self.write(id, &Entry::Create(problem.clone()), true)
    }

    pub fn append(&self, id: &str, delta: &Delta) -> Result<(), JournalError> {
        self.write(id, &Entry::Delta(Box::new(delta.clone())), false)
    }

    /// Every journaled session, by id.
    pub fn load_all(&self, exec: Exec) -> Result<Vec<(String, Session)>, JournalError> {
        let entries = fs::read_dir(&self.dir).map_err(|source| JournalError::Io { path: self.dir.clone(), source })?;
        let mut out = Vec::new();
        for entry in entries {
            let path = entry.map_err(|source| JournalError::Io { path: self.dir.clone(), source })?.path();
            if path.extension().is_some_and(|e| e == "jsonl") {
                let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
                out.push((id, load(&path, exec)?));
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(out)
    }
}

/// Rebuilds one session from its journal file.
pub fn load(path: &Path, exec: Exec) -> Result<Session, JournalError> {
    let file = File::open(path).map_err(|source| JournalError::Io { path: path.to_path_buf(), source })?;
    let corrupt = |line: usize, message: String| JournalError::Corrupt { path: path.to_path_buf(), line, message };
    let mut session: Option<Session> = None;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| JournalError::Io { path: path.to_path_buf(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: Entry = serde_json::from_str(&line).map_err(|e| corrupt(i + 1, e.to_string()))?;
        match (entry, session.as_mut()) {
            (Entry::Create(p), None) => {
                session = Some(Session::create(p, exec).map_err(|source| JournalError::Replay { path: path.to_path_buf(), source })?);
            }
            (Entry::Delta(d), Some(s)) => {
                s.replay_delta(&d).map_err(|source| JournalError::Replay { path: path.to_path_buf(), source })?;
                if s.graph_view().version != d.version {
                    return Err(corrupt(i + 1, format!("replayed version {} differs from {}", s.graph_view().version, d.version)));
                }
            }
            (Entry::Create(_), Some(_)) => return Err(corrupt(i + 1, "second creation entry".into())),
            (Entry::Delta(_), None) => return Err(corrupt(i + 1, "delta before creation".into())),
        }
    }
    session.ok_or_else(|| corrupt(0, "empty journal".into()))
}
