//! Tutor phases, the unsolicited-hint scheduler, live sessions, and the
//! append-only event log with replay.

mod event;
mod live;
mod log;
mod phase;
mod replay;
mod run;
mod scheduler;

pub use event::{EventBody, EventKind, ProblemStart, SessionEvent};
pub use live::{LiveAttempt, Session, SessionError, ShownHint, StepReport};
pub use log::{
    logs_to_jsonl, read_jsonl, read_jsonl_file, CorruptLog, EventSink, JsonlSink, LogError, MemorySink,
    SessionLog,
};
pub use phase::{Curriculum, CurriculumConfig, CurriculumError, Phase};
pub use replay::{
    problem_from_start, replay, scheduler_active, AttemptOutcome, AttemptReplay, Delta, HintRecord, KeyTrace,
    KeyTransition, Replay, StepRecord,
};
pub use run::CurriculumRun;
pub use scheduler::{unsolicited_cap, CheckDecision, SchedulerSnapshot, SchedulerState};

/// Replays every log, failing on the first corrupt one.
pub fn replay_all(logs: &[SessionLog]) -> Result<Vec<Replay>, CorruptLog> {
    logs.iter().map(replay).collect()
}
