//! A live tutoring session: one student working through problems, with every
//! action recorded as an event.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::hints::{next_step_hint, waypoint_hint, Hint, HintError, HintSource, HintType, NetworkLibrary};
use crate::logic::{Formula, RuleId};
use crate::proof::{new_proof, HintMeta, NodeId, ProblemDef, ProofError, ProofState, StepOutcome};

use super::event::{EventBody, ProblemStart, SessionEvent};
use super::log::{EventSink, LogError, SessionLog};
use super::phase::Phase;
use super::replay::{AttemptOutcome, KeyTrace};
use super::scheduler::{CheckDecision, SchedulerState};

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error("no problem is in progress")]
    NoActiveProblem,
    #[error("a problem is already in progress")]
    ProblemInProgress,
    #[error("PhaseForbidsHints: hints are not available during {0}")]
    PhaseForbidsHints(Phase),
    #[error("PhaseForbids: restart and skip are not available during {0}")]
    PhaseForbidsSkip(Phase),
    #[error("this session has no hint condition")]
    HintsDisabled,
    #[error("HintAlreadyPresent: justify or delete the current hint first")]
    HintAlreadyPresent,
    #[error(transparent)]
    NoHint(HintError),
    #[error(transparent)]
    Proof(#[from] ProofError),
    #[error(transparent)]
    Log(#[from] LogError),
}

/// A hint placed in the workspace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShownHint {
    pub node: NodeId,
    pub hint: Hint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepReport {
    pub outcome: StepOutcome,
    /// Set when this step ended the attempt by justifying the conclusion.
    pub completed: bool,
    pub decision: Option<CheckDecision>,
    pub unsolicited: Option<ShownHint>,
}

/// The attempt in progress.
#[derive(Debug, Clone)]
pub struct LiveAttempt {
    pub problem: ProblemDef,
    pub phase: Phase,
    pub attempt: u32,
    pub worked_example: bool,
    pub state: ProofState,
    pub scheduler: Option<SchedulerState>,
    pub trace: KeyTrace,
    pub outcome: AttemptOutcome,
    shown_at: BTreeMap<NodeId, usize>,
}

pub struct Session {
    pub sid: String,
    pub student: String,
    pub condition: Option<HintType>,
    log: SessionLog,
    sink: Option<Arc<dyn EventSink>>,
    networks: Arc<NetworkLibrary>,
    current: Option<LiveAttempt>,
    last: Option<LiveAttempt>,
    attempts: BTreeMap<String, u32>,
}

impl Session {
    pub fn new(
        sid: impl Into<String>,
        student: impl Into<String>,
        condition: Option<HintType>,
        networks: Arc<NetworkLibrary>,
    ) -> Session {
        let sid = sid.into();
        Session {
            log: SessionLog::new(sid.clone()),
            sid,
            student: student.into(),
            condition,
            sink: None,
            networks,
            current: None,
            last: None,
            attempts: BTreeMap::new(),
        }
    }

    /// Also writes every event to `sink` as it is recorded.
    pub fn with_sink(mut self, sink: Arc<dyn EventSink>) -> Session {
        self.sink = Some(sink);
        self
    }

    pub fn log(&self) -> &SessionLog {
        &self.log
    }

    pub fn into_log(self) -> SessionLog {
        self.log
    }

    pub fn current(&self) -> Option<&LiveAttempt> {
        self.current.as_ref()
    }

    /// The most recently finished attempt.
    pub fn last_finished(&self) -> Option<&LiveAttempt> {
        self.last.as_ref()
    }

    fn emit(&mut self, pid: &str, t_ms: u64, body: EventBody) -> Result<(), LogError> {
        let event = SessionEvent {
            sid: self.sid.clone(),
            pid: pid.to_string(),
            seq: self.log.next_seq(),
            t_ms,
            body,
        };
        self.log.check_append(&event)?;
        if let Some(sink) = &self.sink {
            sink.append(&event)?;
        }
        self.log.append_event(event)
    }

    fn active(&mut self) -> Result<&mut LiveAttempt, SessionError> {
        self.current.as_mut().ok_or(SessionError::NoActiveProblem)
    }

    pub fn start_problem(
        &mut self,
        problem: &ProblemDef,
        phase: Phase,
        worked_example: bool,
        sched_seed: u64,
        t_ms: u64,
    ) -> Result<&LiveAttempt, SessionError> {
        if self.current.is_some() {
            return Err(SessionError::ProblemInProgress);
        }
        let mut state = new_proof(problem)?;
        state.started_at = t_ms;
        let attempt = self.attempts.get(&problem.id).copied().unwrap_or(0);
        let start = ProblemStart {
            student: self.student.clone(),
            condition: self.condition,
            phase,
            attempt,
            givens: problem.givens.clone(),
            conclusion: problem.conclusion.clone(),
            rules: problem.rules.clone(),
            expert_length: problem.expert_length,
            sched_seed,
            worked_example,
        };
        let scheduler = super::replay::scheduler_active(&start)
            .then(|| SchedulerState::new(problem.expert_length, sched_seed));
        self.emit(&problem.id, t_ms, EventBody::ProblemStart(start))?;
        self.attempts.insert(problem.id.clone(), attempt + 1);
        self.current = Some(LiveAttempt {
            problem: problem.clone(),
            phase,
            attempt,
            worked_example,
            trace: KeyTrace::start(&state),
            state,
            scheduler,
            outcome: AttemptOutcome::Open,
            shown_at: BTreeMap::new(),
        });
        Ok(self.current.as_ref().expect("just started"))
    }

    fn finish(&mut self, outcome: AttemptOutcome, t_ms: u64) {
        if let Some(mut a) = self.current.take() {
            a.outcome = outcome;
            a.state.ended_at = Some(t_ms);
            self.last = Some(a);
        }
    }

    /// Applies a rule to the selected nodes. Rule and statement mistakes are
    /// normal outcomes; only malformed requests return an error.
    pub fn step(
        &mut self,
        premises: &[NodeId],
        rule: RuleId,
        claimed: Option<&Formula>,
        t_ms: u64,
    ) -> Result<StepReport, SessionError> {
        let a = self.active()?;
        let pid = a.problem.id.clone();
        let outcome = a.state.attempt_step(premises, rule, claimed)?;
        let body = match &outcome {
            StepOutcome::NeedsInput { options } => {
                let body = EventBody::Apply {
                    premises: premises.to_vec(),
                    rule,
                    options: options.clone(),
                };
                self.emit(&pid, t_ms, body)?;
                return Ok(StepReport {
                    outcome,
                    completed: false,
                    decision: None,
                    unsolicited: None,
                });
            }
            StepOutcome::Derived {
                node,
                statement,
                justified_hint,
                ..
            } => {
                a.trace.add(statement, rule);
                EventBody::Derive {
                    premises: premises.to_vec(),
                    rule,
                    statement: statement.clone(),
                    node: *node,
                    justified_hint: *justified_hint,
                    redundant: false,
                }
            }
            StepOutcome::Redundant { existing } => EventBody::Derive {
                premises: premises.to_vec(),
                rule,
                statement: a.state.node(*existing).expect("existing node").statement.clone(),
                node: *existing,
                justified_hint: false,
                redundant: true,
            },
            StepOutcome::Rejected { error } => EventBody::DeriveError {
                premises: premises.to_vec(),
                rule,
                claimed: claimed.cloned(),
                error: error.to_string(),
            },
        };
        let step_count = a.state.step_count;
        let justified = match &outcome {
            StepOutcome::Derived {
                node,
                statement,
                justified_hint: true,
                ..
            } => a.shown_at.get(node).map(|&at| (*node, statement.clone(), step_count - at)),
            _ => None,
        };
        self.emit(&pid, t_ms, body)?;
        if let Some((node, statement, steps)) = justified {
            self.emit(&pid, t_ms, EventBody::HintJustified { node, statement, steps })?;
        }
        if matches!(outcome, StepOutcome::Derived { completed: true, .. }) {
            self.emit(&pid, t_ms, EventBody::Complete {})?;
            self.finish(AttemptOutcome::Completed, t_ms);
            return Ok(StepReport {
                outcome,
                completed: true,
                decision: None,
                unsolicited: None,
            });
        }
        let a = self.active()?;
        let pending = a.state.pending_hint().is_some();
        let decision = a.scheduler.as_mut().map(|s| s.on_step(pending));
        let mut unsolicited = None;
        if decision == Some(CheckDecision::Fire) {
            let condition = self.condition.expect("scheduler runs only with a condition");
            if let Ok(hint) = self.select_hint(condition, HintSource::Unsolicited) {
                // an unsolicited hint must be of the session's own type
                if hint.hint_type == condition {
                    let shown = self.place_hint(hint, t_ms)?;
                    let a = self.active()?;
                    a.scheduler.as_mut().expect("scheduler").record_unsolicited();
                    unsolicited = Some(shown);
                }
            }
        }
        Ok(StepReport {
            outcome,
            completed: false,
            decision,
            unsolicited,
        })
    }

    fn select_hint(&self, hint_type: HintType, source: HintSource) -> Result<Hint, HintError> {
        let a = self.current.as_ref().expect("active attempt");
        let net = self
            .networks
            .get(&a.problem.id)
            .ok_or_else(|| HintError::NoNetwork(a.problem.id.clone()))?;
        let statements = a.state.justified_statements();
        let mut hint = match hint_type {
            HintType::NextStep => next_step_hint(net, &statements)?,
            HintType::Waypoint => waypoint_hint(net, &statements)?,
        };
        hint.source = source;
        Ok(hint)
    }

    fn place_hint(&mut self, hint: Hint, t_ms: u64) -> Result<ShownHint, SessionError> {
        let a = self.active()?;
        let meta = HintMeta {
            hint_type: hint.hint_type,
            source: hint.source,
            depth: hint.depth,
        };
        let node = a.state.add_hint_node(hint.statement.clone(), meta)?;
        a.shown_at.insert(node, a.state.step_count);
        let pid = a.problem.id.clone();
        let body = EventBody::HintShown {
            node,
            statement: hint.statement.clone(),
            hint_type: hint.hint_type,
            source: hint.source,
            depth: hint.depth,
            value: hint.value,
            target: Some(hint.target_state.to_string()),
        };
        self.emit(&pid, t_ms, body)?;
        Ok(ShownHint { node, hint })
    }

    /// On-demand hint of the session's condition type.
    pub fn request_hint(&mut self, t_ms: u64) -> Result<ShownHint, SessionError> {
        let condition = self.condition;
        let a = self.active()?;
        if !a.phase.hints_enabled() || a.worked_example {
            return Err(SessionError::PhaseForbidsHints(a.phase));
        }
        let condition = condition.ok_or(SessionError::HintsDisabled)?;
        if a.state.pending_hint().is_some() {
            let pid = a.problem.id.clone();
            self.emit(&pid, t_ms, EventBody::HintRequestDenied {})?;
            return Err(SessionError::HintAlreadyPresent);
        }
        let hint = self
            .select_hint(condition, HintSource::Requested)
            .map_err(SessionError::NoHint)?;
        self.place_hint(hint, t_ms)
    }

    pub fn delete(&mut self, node: NodeId, t_ms: u64) -> Result<crate::proof::DeleteReport, SessionError> {
        let a = self.active()?;
        let before = a.state.clone();
        let report = a.state.delete_node(node)?;
        a.trace.delete(&before, &report);
        let pid = a.problem.id.clone();
        let body = EventBody::Delete {
            node,
            removed: report.removed.iter().map(|(_, s)| s.clone()).collect(),
            reverted: report.reverted.clone(),
        };
        self.emit(&pid, t_ms, body)?;
        Ok(report)
    }

    fn check_skip_allowed(&self) -> Result<(), SessionError> {
        let a = self.current.as_ref().ok_or(SessionError::NoActiveProblem)?;
        if !a.phase.skip_enabled() {
            return Err(SessionError::PhaseForbidsSkip(a.phase));
        }
        Ok(())
    }

    /// Erases all progress and starts the same problem again.
    pub fn restart(&mut self, sched_seed: u64, t_ms: u64) -> Result<&LiveAttempt, SessionError> {
        self.check_skip_allowed()?;
        let a = self.current.as_ref().expect("checked");
        let (problem, phase, worked) = (a.problem.clone(), a.phase, a.worked_example);
        self.emit(&problem.id, t_ms, EventBody::Restart {})?;
        self.finish(AttemptOutcome::Restarted, t_ms);
        self.start_problem(&problem, phase, worked, sched_seed, t_ms)
    }

    /// Abandons the current problem.
    pub fn skip(&mut self, t_ms: u64) -> Result<(), SessionError> {
        self.check_skip_allowed()?;
        let pid = self.current.as_ref().expect("checked").problem.id.clone();
        self.emit(&pid, t_ms, EventBody::Skip {})?;
        self.finish(AttemptOutcome::Skipped, t_ms);
        Ok(())
    }
}
