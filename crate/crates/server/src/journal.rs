//! Append-only NDJSON event journal.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::error::ServiceError;
use crate::model::Event;

#[derive(Debug, Default)]
pub struct Journal {
    path: Option<PathBuf>,
    file: Option<File>,
}

impl Journal {
    /// A journal that keeps nothing.
    pub fn memory() -> Self {
        Journal::default()
    }

    /// Opens `path` for appending and returns the events already in it.
    pub fn open(path: &Path) -> Result<(Self, Vec<Event>), ServiceError> {
        let io = |e: std::io::Error| ServiceError::Journal(format!("{}: {e}", path.display()));
        let mut events = Vec::new();
        if path.exists() {
            let reader = BufReader::new(File::open(path).map_err(io)?);
            for (i, line) in reader.lines().enumerate() {
                let line = line.map_err(io)?;
                if line.trim().is_empty() {
                    continue;
                }
                let ev = serde_json::from_str(&line).map_err(|e| {
                    ServiceError::Journal(format!("{} line {}: {e}", path.display(), i + 1))
                })?;
                events.push(ev);
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(io)?;
        Ok((
            Journal {
                path: Some(path.to_path_buf()),
                file: Some(file),
            },
            events,
        ))
    }

    pub fn append(&mut self, event: &Event) -> Result<(), ServiceError> {
        let Some(file) = self.file.as_mut() else {
            return Ok(());
        };
        let mut line =
            serde_json::to_string(event).map_err(|e| ServiceError::Journal(e.to_string()))?;
        line.push('\n');
        file.write_all(line.as_bytes())
            .and_then(|_| file.flush())
            .map_err(|e| ServiceError::Journal(format!("{:?}: {e}", self.path)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Role;

    fn temp_path(name: &str) -> PathBuf {
        std::env::temp_dir().join(format!(
            "kielo-journal-{}-{name}.ndjson",
            std::process::id()
        ))
    }

    #[test]
    fn appended_events_are_read_back_in_order() {
        let path = temp_path("order");
        let _ = std::fs::remove_file(&path);
        let events = [
            Event::UserRegistered {
                id: "u1".into(),
                name: "Aino".into(),
                role: Role::Learner,
                token: "t".into(),
            },
            Event::HintRequested {
                session: "s2".into(),
                exercise: 0,
                timestamp: 3,
            },
        ];
        let (mut journal, existing) = Journal::open(&path).unwrap();
        assert!(existing.is_empty());
        for e in &events {
            journal.append(e).unwrap();
        }
        drop(journal);
        let (_, read) = Journal::open(&path).unwrap();
        assert_eq!(read, events);
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn corrupt_line_is_reported_with_its_number() {
        let path = temp_path("corrupt");
        std::fs::write(&path, "\n{\"event\":\"nonsense\"}\n").unwrap();
        let err = Journal::open(&path).unwrap_err();
        assert!(
            matches!(&err, ServiceError::Journal(m) if m.contains("line 2")),
            "{err}"
        );
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn memory_journal_accepts_appends() {
        let mut j = Journal::memory();
        j.append(&Event::HintRequested {
            session: "s".into(),
            exercise: 1,
            timestamp: 0,
        })
        .unwrap();
    }
}
