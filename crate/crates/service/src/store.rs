//! Append-only JSON-lines event logs, one file per session.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::session::Event;
use crate::ServiceError;

const EXTENSION: &str = "jsonl";

#[derive(Debug)]
pub struct EventLog {
    path: PathBuf,
    file: File,
}

impl EventLog {
    pub fn create(dir: &Path, id: &str) -> Result<Self, ServiceError> {
        let path = dir.join(format!("{id}.{EXTENSION}"));
        let file = OpenOptions::new().create_new(true).append(true).open(&path)?;
        Ok(Self { path, file })
    }

    pub fn open(path: &Path) -> Result<Self, ServiceError> {
        let file = OpenOptions::new().append(true).open(path)?;
        Ok(Self {
            path: path.to_path_buf(),
            file,
        })
    }

    /// Writes one event and syncs it to disk before returning.
    pub fn append(&mut self, event: &Event) -> Result<(), ServiceError> {
        let mut line = serde_json::to_string(event).map_err(|e| ServiceError::Storage(e.to_string()))?;
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.file.sync_data()?;
        Ok(())
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

/// Reads a log. A final line without its newline is a torn write and is
/// dropped; any other unreadable line is an error.
pub fn read_log(path: &Path) -> Result<Vec<Event>, ServiceError> {
    let text = fs::read_to_string(path)?;
    let complete = match text.rfind('\n') {
        Some(i) => &text[..=i],
        None => "",
    };
    complete
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| ServiceError::CorruptLog {
                file: path.display().to_string(),
                message: format!("line {}: {e}", i + 1),
            })
        })
        .collect()
}

/// Creates `dir` if needed and lists its session logs in name order.
pub fn prepare_dir(dir: &Path) -> Result<Vec<PathBuf>, ServiceError> {
    fs::create_dir_all(dir).map_err(|e| ServiceError::Storage(format!("data directory {}: {e}", dir.display())))?;
    let mut logs = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|x| x == EXTENSION) {
            logs.push(path);
        }
    }
    logs.sort();
    Ok(logs)
}

/// Truncates a torn final line so later appends start on a fresh line.
pub fn repair_tail(path: &Path) -> Result<(), ServiceError> {
    let text = fs::read_to_string(path)?;
    if !text.is_empty() && !text.ends_with('\n') {
        let keep = text.rfind('\n').map_or(0, |i| i + 1);
        OpenOptions::new().write(true).open(path)?.set_len(keep as u64)?;
    }
    Ok(())
}
