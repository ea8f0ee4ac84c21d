//! The append-only event log. Everything else the service knows is derived
//! by replaying it.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qmoves_core::control::PlayRecord;

use crate::model::{ExperimentCell, Origin};
use crate::{Result, ServiceError};

pub const LOG_FILE: &str = "events.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    UserRegistered {
        user_id: String,
        name: String,
        origin: Origin,
        cell: ExperimentCell,
        timestamp_ms: i64,
    },
    PlaySubmitted {
        play_id: u64,
        /// Base64 of the binary play record.
        #[serde(with = "qmplay_base64")]
        record: PlayRecord,
    },
}

impl Event {
    pub fn timestamp_ms(&self) -> i64 {
        match self {
            Event::UserRegistered { timestamp_ms, .. } => *timestamp_ms,
            Event::PlaySubmitted { record, .. } => record.timestamp_ms,
        }
    }
}

mod qmplay_base64 {
    use base64::engine::general_purpose::STANDARD;
    use base64::Engine;
    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serializer};

    use qmoves_core::control::{decode_play, encode_play, PlayRecord};

    pub fn serialize<S: Serializer>(record: &PlayRecord, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&STANDARD.encode(encode_play(record)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<PlayRecord, D::Error> {
        let text = String::deserialize(d)?;
        let bytes = STANDARD.decode(text).map_err(D::Error::custom)?;
        decode_play(&bytes).map_err(D::Error::custom)
    }
}

/// JSON-lines log, optionally backed by `<dir>/events.jsonl`.
#[derive(Debug)]
pub struct EventLog {
    writer: Option<BufWriter<File>>,
    path: Option<PathBuf>,
}

impl EventLog {
    pub fn in_memory() -> Self {
        Self {
            writer: None,
            path: None,
        }
    }

    /// Opens (creating if needed) the log in `dir` and returns what it holds.
    pub fn open(dir: &Path) -> Result<(Self, Vec<Event>)> {
        fs::create_dir_all(dir)?;
        let path = dir.join(LOG_FILE);
        let events = read_log(&path)?;
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok((
            Self {
                writer: Some(BufWriter::new(file)),
                path: Some(path),
            },
            events,
        ))
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    /// Writes one line and flushes it to the OS.
    pub fn append(&mut self, event: &Event) -> Result<()> {
        if let Some(w) = &mut self.writer {
            let line =
                serde_json::to_string(event).map_err(|e| ServiceError::Invalid(e.to_string()))?;
            w.write_all(line.as_bytes())?;
            w.write_all(b"\n")?;
            w.flush()?;
        }
        Ok(())
    }

    /// Flushes and fsyncs.
    pub fn sync(&mut self) -> Result<()> {
        if let Some(w) = &mut self.writer {
            w.flush()?;
            w.get_ref().sync_all()?;
        }
        Ok(())
    }
}

/// Events stored under `dir`; a missing directory or log reads as empty.
pub fn read_events(dir: &Path) -> Result<Vec<Event>> {
    read_log(&dir.join(LOG_FILE))
}

fn read_log(path: &Path) -> Result<Vec<Event>> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let mut events = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let event = serde_json::from_str(&line).map_err(|e| ServiceError::Corrupt {
            line: i + 1,
            message: e.to_string(),
        })?;
        events.push(event);
    }
    Ok(events)
}
