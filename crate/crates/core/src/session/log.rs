//! Append-only event log, one JSON object per line.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Mutex;

use super::event::{EventBody, SessionEvent};

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error("sequence gap: expected seq {expected}, got {got}")]
    SequenceGap { expected: u64, got: u64 },
    #[error("event seq {seq} follows a terminal event without a new problem_start")]
    TerminalViolation { seq: u64 },
    #[error("event for session {got} appended to log of session {expected}")]
    SessionMismatch { expected: String, got: String },
    #[error("write failed: {0}")]
    WriteFailure(#[from] std::io::Error),
}

/// A log that cannot be read back or replayed.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct CorruptLog {
    pub file: Option<String>,
    pub line: Option<usize>,
    pub seq: Option<u64>,
    pub reason: String,
}

impl std::fmt::Display for CorruptLog {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "CorruptLog")?;
        match (&self.file, self.line) {
            (Some(file), Some(line)) => write!(f, " at {file}:{line}")?,
            (None, Some(line)) => write!(f, " at line {line}")?,
            (Some(file), None) => write!(f, " in {file}")?,
            (None, None) => {}
        }
        if let Some(seq) = self.seq {
            write!(f, " (seq {seq})")?;
        }
        write!(f, ": {}", self.reason)
    }
}

impl CorruptLog {
    pub fn at_seq(seq: u64, reason: impl Into<String>) -> CorruptLog {
        CorruptLog {
            file: None,
            line: None,
            seq: Some(seq),
            reason: reason.into(),
        }
    }
}

/// Events of one session, with the sequencing rules enforced on append.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SessionLog {
    pub sid: String,
    events: Vec<SessionEvent>,
    /// Source line of each event when read from a file.
    lines: Vec<Option<usize>>,
}

impl SessionLog {
    pub fn new(sid: impl Into<String>) -> SessionLog {
        SessionLog {
            sid: sid.into(),
            ..Default::default()
        }
    }

    pub fn events(&self) -> &[SessionEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn next_seq(&self) -> u64 {
        self.events.last().map_or(0, |e| e.seq + 1)
    }

    pub fn line_of(&self, index: usize) -> Option<usize> {
        self.lines.get(index).copied().flatten()
    }

    /// Checks that `event` may follow the current tail.
    pub fn check_append(&self, event: &SessionEvent) -> Result<(), LogError> {
        if event.sid != self.sid {
            return Err(LogError::SessionMismatch {
                expected: self.sid.clone(),
                got: event.sid.clone(),
            });
        }
        let expected = self.next_seq();
        if event.seq != expected {
            return Err(LogError::SequenceGap {
                expected,
                got: event.seq,
            });
        }
        let open = match self.events.last() {
            None => false,
            Some(last) => !last.body.is_terminal(),
        };
        if !open && !matches!(event.body, EventBody::ProblemStart(_)) {
            return Err(LogError::TerminalViolation { seq: event.seq });
        }
        Ok(())
    }

    pub fn append_event(&mut self, event: SessionEvent) -> Result<(), LogError> {
        self.check_append(&event)?;
        self.events.push(event);
        self.lines.push(None);
        Ok(())
    }

    fn append_with_line(&mut self, event: SessionEvent, line: usize) -> Result<(), LogError> {
        self.check_append(&event)?;
        self.events.push(event);
        self.lines.push(Some(line));
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&e.to_json_line());
            out.push('\n');
        }
        out
    }
}

/// Destination for events as they are recorded.
pub trait EventSink: Send + Sync {
    fn append(&self, event: &SessionEvent) -> Result<(), LogError>;
}

/// Appends JSON lines to a file, flushing after every event.
pub struct JsonlSink {
    writer: Mutex<BufWriter<File>>,
}

impl JsonlSink {
    pub fn create(path: &Path) -> Result<JsonlSink, LogError> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(JsonlSink {
            writer: Mutex::new(BufWriter::new(file)),
        })
    }
}

impl EventSink for JsonlSink {
    fn append(&self, event: &SessionEvent) -> Result<(), LogError> {
        let mut w = self.writer.lock().expect("log writer lock");
        w.write_all(event.to_json_line().as_bytes())?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }
}

/// Keeps every event in memory; used by tests and tools.
#[derive(Default)]
pub struct MemorySink {
    pub events: Mutex<Vec<SessionEvent>>,
}

impl EventSink for MemorySink {
    fn append(&self, event: &SessionEvent) -> Result<(), LogError> {
        self.events.lock().expect("sink lock").push(event.clone());
        Ok(())
    }
}

/// Splits a JSONL stream into per-session logs, in first-appearance order.
pub fn read_jsonl(reader: impl BufRead, file: Option<&str>) -> Result<Vec<SessionLog>, CorruptLog> {
    let mut order: Vec<String> = Vec::new();
    let mut logs: BTreeMap<String, SessionLog> = BTreeMap::new();
    let corrupt = |line: usize, seq: Option<u64>, reason: String| CorruptLog {
        file: file.map(str::to_string),
        line: Some(line),
        seq,
        reason,
    };
    for (i, text) in reader.lines().enumerate() {
        let line_no = i + 1;
        let text = text.map_err(|e| corrupt(line_no, None, e.to_string()))?;
        if text.trim().is_empty() {
            continue;
        }
        let event: SessionEvent =
            serde_json::from_str(&text).map_err(|e| corrupt(line_no, None, e.to_string()))?;
        let seq = event.seq;
        let log = logs.entry(event.sid.clone()).or_insert_with(|| {
            order.push(event.sid.clone());
            SessionLog::new(event.sid.clone())
        });
        log.append_with_line(event, line_no)
            .map_err(|e| corrupt(line_no, Some(seq), e.to_string()))?;
    }
    Ok(order.into_iter().map(|sid| logs.remove(&sid).expect("sid recorded")).collect())
}

pub fn read_jsonl_file(path: &Path) -> Result<Vec<SessionLog>, CorruptLog> {
    let name = path.display().to_string();
    let file = File::open(path).map_err(|e| CorruptLog {
        file: Some(name.clone()),
        line: None,
        seq: None,
        reason: e.to_string(),
    })?;
    read_jsonl(BufReader::new(file), Some(&name))
}

pub fn logs_to_jsonl<'a>(logs: impl IntoIterator<Item = &'a SessionLog>) -> String {
    logs.into_iter().map(SessionLog::to_jsonl).collect()
}
