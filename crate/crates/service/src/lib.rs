//! JSON-over-HTTP tutor service. Each session walks one student through the
//! curriculum; requests for one session are serialized, distinct sessions run
//! concurrently.

mod client;
mod error;
mod routes;
mod view;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use prooftutor_core::hints::{HintType, NetworkLibrary};
use prooftutor_core::proof::CorpusNodeStats;
use prooftutor_core::session::{replay_all, AttemptOutcome, CorruptLog, Curriculum, CurriculumRun, EventSink, SessionLog};

pub use client::{expert_step, run_curriculum, ClientError, TutorClient};
pub use error::{ApiError, ErrorBody};
pub use routes::{router, CreateSession, DeleteResponse, HintResponse, StepRequest, StepResponse, StepResult};
pub use view::{
    attempt_view, proof_view, session_view, ApiSession, AttemptView, HintView, NodeView, ProblemView, ProofView,
    ScriptedStep,
};

/// Milliseconds on the session clock.
pub type Clock = Arc<dyn Fn() -> u64 + Send + Sync>;

pub(crate) struct Entry {
    pub run: CurriculumRun,
    pub condition: HintType,
}

#[derive(Default)]
struct Registry {
    sessions: HashMap<String, Arc<Mutex<Entry>>>,
    students: HashSet<String>,
}

pub struct AppState {
    pub curriculum: Arc<Curriculum>,
    pub networks: Arc<NetworkLibrary>,
    /// Historical necessity counts per problem, used for node colors.
    pub node_stats: BTreeMap<String, CorpusNodeStats>,
    sink: Option<Arc<dyn EventSink>>,
    clock: Clock,
    rng: Mutex<ChaCha8Rng>,
    registry: Mutex<Registry>,
}

impl AppState {
    pub fn new(curriculum: Arc<Curriculum>, networks: Arc<NetworkLibrary>, seed: u64) -> AppState {
        let start = Instant::now();
        AppState {
            curriculum,
            networks,
            node_stats: BTreeMap::new(),
            sink: None,
            clock: Arc::new(move || start.elapsed().as_millis() as u64),
            rng: Mutex::new(ChaCha8Rng::seed_from_u64(seed)),
            registry: Mutex::default(),
        }
    }

    /// Also appends every event of every session to `sink`.
    pub fn with_sink(mut self, sink: Arc<dyn EventSink>) -> AppState {
        self.sink = Some(sink);
        self
    }

    pub fn with_clock(mut self, clock: Clock) -> AppState {
        self.clock = clock;
        self
    }

    pub fn with_node_stats(mut self, stats: BTreeMap<String, CorpusNodeStats>) -> AppState {
        self.node_stats = stats;
        self
    }

    pub(crate) fn now(&self) -> u64 {
        (self.clock)()
    }

    pub(crate) fn entry(&self, sid: &str) -> Result<Arc<Mutex<Entry>>, ApiError> {
        self.registry
            .lock()
            .expect("registry lock")
            .sessions
            .get(sid)
            .cloned()
            .ok_or_else(|| ApiError::UnknownSession(sid.to_string()))
    }

    pub(crate) fn create(&self, student: &str, condition: Option<HintType>) -> Result<Arc<Mutex<Entry>>, ApiError> {
        let mut reg = self.registry.lock().expect("registry lock");
        if reg.students.contains(student) {
            return Err(ApiError::DuplicateSession(student.to_string()));
        }
        let (sid, condition, seed) = {
            let mut rng = self.rng.lock().expect("rng lock");
            let sid = format!("{:016x}", rng.random::<u64>());
            let condition = condition.unwrap_or(if rng.random_bool(0.5) {
                HintType::NextStep
            } else {
                HintType::Waypoint
            });
            (sid, condition, rng.random::<u64>())
        };
        let mut session = prooftutor_core::session::Session::new(&sid, student, Some(condition), self.networks.clone());
        if let Some(sink) = &self.sink {
            session = session.with_sink(sink.clone());
        }
        let run = CurriculumRun::begin(session, self.curriculum.clone(), seed, self.now())?;
        let entry = Arc::new(Mutex::new(Entry { run, condition }));
        reg.students.insert(student.to_string());
        reg.sessions.insert(sid, entry.clone());
        Ok(entry)
    }

    /// Event log of a session so far.
    pub fn session_log(&self, sid: &str) -> Option<SessionLog> {
        let entry = self.entry(sid).ok()?;
        let e = entry.lock().expect("session lock");
        Some(e.run.session.log().clone())
    }
}

/// Necessity counts from the completed attempts in `logs`, for node colors.
pub fn node_stats_from_logs(logs: &[SessionLog]) -> Result<BTreeMap<String, CorpusNodeStats>, CorruptLog> {
    let replays = replay_all(logs)?;
    let mut by_problem: BTreeMap<String, Vec<_>> = BTreeMap::new();
    for a in replays.iter().flat_map(|r| &r.attempts) {
        if a.outcome == AttemptOutcome::Completed {
            by_problem.entry(a.pid.clone()).or_default().push(&a.state);
        }
    }
    Ok(by_problem
        .into_iter()
        .map(|(pid, proofs)| {
            let stats = CorpusNodeStats::from_solutions(&pid, proofs);
            (pid, stats)
        })
        .collect())
}

/// Serves the API on `listener` until the task is dropped.
pub async fn serve(listener: tokio::net::TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}
