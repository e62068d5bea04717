//! Rebuilds every attempt of a session from its event log.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::hints::{HintSource, HintType};
use crate::logic::{Formula, RuleId};
use crate::proof::{new_proof, DeleteReport, HintMeta, NodeId, ProblemDef, ProofState, StateKey, StepOutcome};

use super::event::{EventBody, ProblemStart, SessionEvent};
use super::log::{CorruptLog, SessionLog};
use super::phase::Phase;
use super::scheduler::{CheckDecision, SchedulerSnapshot, SchedulerState};

/// One statement entering or leaving the set of justified statements.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Delta {
    Added(Formula),
    Removed(Formula),
}

impl Delta {
    pub fn statement(&self) -> &Formula {
        match self {
            Delta::Added(f) | Delta::Removed(f) => f,
        }
    }

    pub fn is_add(&self) -> bool {
        matches!(self, Delta::Added(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyTransition {
    pub src: StateKey,
    pub dst: StateKey,
    pub rule: Option<RuleId>,
    pub delta: Delta,
}

/// The sequence of canonical states an attempt passes through.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct KeyTrace {
    pub keys: Vec<StateKey>,
    pub transitions: Vec<KeyTransition>,
    #[serde(skip)]
    current: BTreeSet<Formula>,
}

impl KeyTrace {
    pub fn start(state: &ProofState) -> KeyTrace {
        let current: BTreeSet<Formula> = state.justified_statements().into_iter().collect();
        KeyTrace {
            keys: vec![StateKey::from_statements(&current)],
            transitions: Vec::new(),
            current,
        }
    }

    pub fn current_key(&self) -> &StateKey {
        self.keys.last().expect("trace starts with the initial key")
    }

    fn push(&mut self, rule: Option<RuleId>, delta: Delta) {
        let src = self.current_key().clone();
        let dst = StateKey::from_statements(&self.current);
        self.keys.push(dst.clone());
        self.transitions.push(KeyTransition { src, dst, rule, delta });
    }

    pub fn add(&mut self, statement: &Formula, rule: RuleId) {
        if self.current.insert(statement.clone()) {
            self.push(Some(rule), Delta::Added(statement.clone()));
        }
    }

    pub fn remove(&mut self, statement: &Formula) {
        if self.current.remove(statement) {
            self.push(None, Delta::Removed(statement.clone()));
        }
    }

    /// Records a deletion as single-statement removals, latest first.
    /// `before` is the state just before `report` was applied.
    pub fn delete(&mut self, before: &ProofState, report: &DeleteReport) {
        let leaving: BTreeSet<NodeId> = report
            .removed
            .iter()
            .map(|(id, _)| *id)
            .chain(report.reverted.iter().copied())
            .collect();
        let mut gone: Vec<(usize, &Formula)> = before
            .justified_nodes()
            .into_iter()
            .filter(|n| leaving.contains(&n.id))
            .map(|n| (n.label.unwrap_or(0), &n.statement))
            .collect();
        gone.sort_by(|a, b| b.0.cmp(&a.0));
        for (_, s) in gone {
            self.remove(s);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttemptOutcome {
    Completed,
    Restarted,
    Skipped,
    /// The log ends without a terminal event.
    Open,
}

impl AttemptOutcome {
    /// Restart, skip, or a session that stopped mid-problem.
    pub fn gave_up(self) -> bool {
        !matches!(self, AttemptOutcome::Completed)
    }
}

/// One derivation attempt.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub seq: u64,
    pub t_ms: u64,
    pub rule: RuleId,
    pub premises: Vec<Formula>,
    /// The derived statement, or the claimed one for a rejected step.
    pub statement: Option<Formula>,
    pub valid: bool,
    pub redundant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HintRecord {
    pub node: NodeId,
    pub statement: Formula,
    pub hint_type: HintType,
    pub source: HintSource,
    pub depth: u8,
    pub value: Option<f64>,
    pub shown_seq: u64,
    /// Steps of the attempt taken before the hint appeared.
    pub shown_after_steps: usize,
    /// Steps from appearance to first justification, counting the justifying one.
    pub justified_after: Option<usize>,
    pub deleted: bool,
    /// Defined for justified hints: on the final proof's path to the conclusion.
    pub adopted: Option<bool>,
}

impl HintRecord {
    pub fn justified(&self) -> bool {
        self.justified_after.is_some()
    }
}

/// A reconstructed problem attempt.
#[derive(Debug, Clone, Serialize)]
pub struct AttemptReplay {
    pub sid: String,
    pub pid: String,
    pub start: ProblemStart,
    pub started_at: u64,
    pub ended_at: Option<u64>,
    pub outcome: AttemptOutcome,
    pub state: ProofState,
    pub trace: KeyTrace,
    /// State key at each rejected step.
    pub error_keys: Vec<StateKey>,
    pub steps: Vec<StepRecord>,
    pub hints: Vec<HintRecord>,
    pub requests: usize,
    pub scheduler: Vec<(u64, CheckDecision, SchedulerSnapshot)>,
}

impl AttemptReplay {
    pub fn phase(&self) -> Phase {
        self.start.phase
    }

    pub fn moved(&self) -> bool {
        !self.trace.transitions.is_empty()
    }

    /// Minutes between the start and the terminal event (0 if still open).
    pub fn minutes(&self) -> f64 {
        self.ended_at.map_or(0.0, |end| end.saturating_sub(self.started_at) as f64 / 60_000.0)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Replay {
    pub sid: String,
    pub attempts: Vec<AttemptReplay>,
}

impl Replay {
    pub fn student(&self) -> Option<&str> {
        self.attempts.first().map(|a| a.start.student.as_str())
    }
}

/// Problem definition carried by a `problem_start` payload.
pub fn problem_from_start(pid: &str, start: &ProblemStart) -> ProblemDef {
    ProblemDef {
        id: pid.to_string(),
        givens: start.givens.clone(),
        conclusion: start.conclusion.clone(),
        rules: start.rules.clone(),
        expert_length: start.expert_length,
        phase: start.phase,
        focus: String::new(),
        expert: Vec::new(),
    }
}

/// Whether attempts under `start` run the unsolicited-hint scheduler.
pub fn scheduler_active(start: &ProblemStart) -> bool {
    start.phase.hints_enabled() && start.condition.is_some() && !start.worked_example
}

struct Open {
    a: AttemptReplay,
    scheduler: Option<SchedulerState>,
    shown_at: BTreeMap<NodeId, (usize, usize)>,
    fired: bool,
}

impl Open {
    fn finish(mut self, outcome: AttemptOutcome, ended_at: Option<u64>) -> AttemptReplay {
        self.a.outcome = outcome;
        self.a.ended_at = ended_at;
        self.a.state.ended_at = ended_at;
        let necessary = self.a.state.necessary_nodes().ok();
        for h in &mut self.a.hints {
            if h.justified() {
                let on_path = !h.deleted && necessary.as_ref().is_some_and(|n| n.contains(&h.node));
                h.adopted = Some(on_path);
            }
        }
        self.a
    }
}

/// Replays every attempt in `log`. Each event is re-executed against a fresh
/// proof state, and any disagreement with the recorded payload is reported.
pub fn replay(log: &SessionLog) -> Result<Replay, CorruptLog> {
    let mut attempts = Vec::new();
    let mut open: Option<Open> = None;
    let mut attempt_counts: BTreeMap<String, u32> = BTreeMap::new();
    for (idx, ev) in log.events().iter().enumerate() {
        let corrupt = |reason: String| CorruptLog {
            file: None,
            line: log.line_of(idx),
            seq: Some(ev.seq),
            reason,
        };
        if let EventBody::ProblemStart(start) = &ev.body {
            if let Some(o) = open.take() {
                attempts.push(o.finish(AttemptOutcome::Open, None));
            }
            let expected = attempt_counts.get(&ev.pid).copied().unwrap_or(0);
            if start.attempt != expected {
                return Err(corrupt(format!("attempt {} but {} expected", start.attempt, expected)));
            }
            attempt_counts.insert(ev.pid.clone(), expected + 1);
            let mut state = new_proof(&problem_from_start(&ev.pid, start)).map_err(|e| corrupt(e.to_string()))?;
            state.started_at = ev.t_ms;
            let scheduler = scheduler_active(start).then(|| SchedulerState::new(start.expert_length, start.sched_seed));
            open = Some(Open {
                a: AttemptReplay {
                    sid: ev.sid.clone(),
                    pid: ev.pid.clone(),
                    start: start.clone(),
                    started_at: ev.t_ms,
                    ended_at: None,
                    outcome: AttemptOutcome::Open,
                    trace: KeyTrace::start(&state),
                    state,
                    error_keys: Vec::new(),
                    steps: Vec::new(),
                    hints: Vec::new(),
                    requests: 0,
                    scheduler: Vec::new(),
                },
                scheduler,
                shown_at: BTreeMap::new(),
                fired: false,
            });
            continue;
        }
        let Some(o) = open.as_mut() else {
            return Err(corrupt("event outside a problem attempt".into()));
        };
        if ev.pid != o.a.pid {
            return Err(corrupt(format!("event for {} inside attempt of {}", ev.pid, o.a.pid)));
        }
        let fired = std::mem::take(&mut o.fired);
        match apply_event(o, ev, fired) {
            Ok(Some(outcome)) => {
                let o = open.take().expect("attempt is open");
                attempts.push(o.finish(outcome, Some(ev.t_ms)));
            }
            Ok(None) => {}
            Err(reason) => return Err(corrupt(reason)),
        }
    }
    if let Some(o) = open.take() {
        attempts.push(o.finish(AttemptOutcome::Open, None));
    }
    Ok(Replay {
        sid: log.sid.clone(),
        attempts,
    })
}

fn node_ids(state: &ProofState, ids: &[NodeId]) -> Result<Vec<Formula>, String> {
    ids.iter()
        .map(|id| state.node(*id).map(|n| n.statement.clone()).ok_or(format!("unknown node {id}")))
        .collect()
}

fn run_scheduler(o: &mut Open, seq: u64) {
    let pending = o.a.state.pending_hint().is_some();
    if let Some(s) = o.scheduler.as_mut() {
        let decision = s.on_step(pending);
        o.fired = decision == CheckDecision::Fire;
        o.a.scheduler.push((seq, decision, s.snapshot()));
    }
}

/// Applies one non-start event; returns the outcome when it ends the attempt.
fn apply_event(o: &mut Open, ev: &SessionEvent, fired: bool) -> Result<Option<AttemptOutcome>, String> {
    match &ev.body {
        EventBody::ProblemStart(_) => unreachable!("handled by the caller"),
        EventBody::Select { .. } | EventBody::Apply { .. } => {}
        EventBody::Derive {
            premises,
            rule,
            statement,
            node,
            justified_hint,
            redundant,
        } => {
            let premise_statements = node_ids(&o.a.state, premises)?;
            let outcome = o
                .a
                .state
                .attempt_step(premises, *rule, Some(statement))
                .map_err(|e| e.to_string())?;
            let completed = match (&outcome, redundant) {
                (
                    StepOutcome::Derived {
                        node: n,
                        statement: s,
                        justified_hint: j,
                        completed,
                    },
                    false,
                ) if n == node && s == statement && j == justified_hint => {
                    o.a.trace.add(statement, *rule);
                    *completed
                }
                (StepOutcome::Redundant { existing }, true) if existing == node => false,
                _ => return Err(format!("derive of {statement} replays as {outcome:?}")),
            };
            o.a.steps.push(StepRecord {
                seq: ev.seq,
                t_ms: ev.t_ms,
                rule: *rule,
                premises: premise_statements,
                statement: Some(statement.clone()),
                valid: true,
                redundant: *redundant,
            });
            if !completed {
                run_scheduler(o, ev.seq);
            }
        }
        EventBody::DeriveError {
            premises,
            rule,
            claimed,
            error,
        } => {
            let premise_statements = node_ids(&o.a.state, premises)?;
            let key = o.a.trace.current_key().clone();
            let outcome = o
                .a
                .state
                .attempt_step(premises, *rule, claimed.as_ref())
                .map_err(|e| e.to_string())?;
            match &outcome {
                StepOutcome::Rejected { error: e } if e.to_string() == *error => {}
                _ => return Err(format!("derive_error replays as {outcome:?}")),
            }
            o.a.error_keys.push(key);
            o.a.steps.push(StepRecord {
                seq: ev.seq,
                t_ms: ev.t_ms,
                rule: *rule,
                premises: premise_statements,
                statement: claimed.clone(),
                valid: false,
                redundant: false,
            });
            run_scheduler(o, ev.seq);
        }
        EventBody::Delete { node, removed, reverted } => {
            let before = o.a.state.clone();
            let report = o.a.state.delete_node(*node).map_err(|e| e.to_string())?;
            let gone: Vec<Formula> = report.removed.iter().map(|(_, s)| s.clone()).collect();
            if &gone != removed || &report.reverted != reverted {
                return Err(format!("delete of {node} replays as {report:?}"));
            }
            for (id, _) in &report.removed {
                if let Some(h) = o.a.hints.iter_mut().find(|h| h.node == *id) {
                    h.deleted = true;
                }
            }
            o.a.trace.delete(&before, &report);
        }
        EventBody::HintShown {
            node,
            statement,
            hint_type,
            source,
            depth,
            value,
            ..
        } => {
            if *source == HintSource::Unsolicited {
                if !fired {
                    return Err("unsolicited hint without a scheduler check".into());
                }
                o.scheduler.as_mut().expect("fired implies a scheduler").record_unsolicited();
            } else {
                if !o.a.start.phase.hints_enabled() {
                    return Err(format!("hint shown in {}", o.a.start.phase));
                }
                o.a.requests += 1;
            }
            let meta = HintMeta {
                hint_type: *hint_type,
                source: *source,
                depth: *depth,
            };
            let id = o
                .a
                .state
                .add_hint_node(statement.clone(), meta)
                .map_err(|e| e.to_string())?;
            if id != *node {
                return Err(format!("hint node {id} recorded as {node}"));
            }
            o.shown_at.insert(id, (o.a.steps.len(), o.a.state.step_count));
            o.a.hints.push(HintRecord {
                node: id,
                statement: statement.clone(),
                hint_type: *hint_type,
                source: *source,
                depth: *depth,
                value: *value,
                shown_seq: ev.seq,
                shown_after_steps: o.a.steps.len(),
                justified_after: None,
                deleted: false,
                adopted: None,
            });
        }
        EventBody::HintJustified { node, steps, .. } => {
            let since = o.shown_at.get(node).ok_or(format!("no hint {node}"))?.1;
            let expected = o.a.state.step_count - since;
            if *steps != expected {
                return Err(format!("hint justified after {steps} steps, replay counts {expected}"));
            }
            let h = o.a.hints.iter_mut().rev().find(|h| h.node == *node).expect("hint recorded");
            h.justified_after.get_or_insert(expected);
            // the scheduler decision that follows this step is still due
            o.fired = fired;
        }
        EventBody::HintRequestDenied {} => {
            if o.a.state.pending_hint().is_none() {
                return Err("hint request denied with no hint pending".into());
            }
            o.a.requests += 1;
        }
        EventBody::Restart {} => return Ok(Some(AttemptOutcome::Restarted)),
        EventBody::Skip {} => return Ok(Some(AttemptOutcome::Skipped)),
        EventBody::Complete {} => {
            if !o.a.state.is_complete() {
                return Err("complete event but the conclusion is not justified".into());
            }
            return Ok(Some(AttemptOutcome::Completed));
        }
    }
    Ok(None)
}
