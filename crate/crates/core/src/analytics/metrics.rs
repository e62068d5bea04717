use std::collections::BTreeMap;

use serde::Serialize;

use crate::hints::{HintSource, HintType};
use crate::logic::Formula;
use crate::session::{replay, AttemptOutcome, AttemptReplay, CorruptLog, HintRecord, Phase, Replay, SessionLog};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct PhaseMetrics {
    /// Minutes spent on problems of the phase.
    pub total_time: f64,
    /// Derivation attempts, valid or not.
    pub total_steps: usize,
    /// Valid steps as a percentage of all steps; 0 without steps.
    pub accuracy: f64,
    /// On-demand hint requests, granted or denied.
    pub total_requests: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct HintAggregates {
    pub total_added: usize,
    pub justification_rate: f64,
    pub adoption_rate: f64,
    pub steps_until_justified: f64,
    pub total_unused: usize,
    pub pct_unused_of_total: f64,
    pub pct_attempted_of_unused: f64,
    pub steps_before: f64,
    pub justified: usize,
    pub adopted: usize,
    pub gave_up: usize,
    pub solved_without: usize,
    pub attempted: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionMetrics {
    pub student: String,
    pub condition: Option<HintType>,
    pub phases: BTreeMap<Phase, PhaseMetrics>,
    pub hints: HintAggregates,
}

impl SessionMetrics {
    pub fn phase(&self, phase: Phase) -> PhaseMetrics {
        self.phases.get(&phase).copied().unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HintStatus {
    Justified,
    Unused,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UnusedCase {
    GaveUp,
    SolvedWithout,
}

/// What became of one shown hint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HintOutcome {
    pub pid: String,
    pub statement: Formula,
    pub hint_type: HintType,
    pub source: HintSource,
    pub status: HintStatus,
    pub adopted: Option<bool>,
    pub unused_case: Option<UnusedCase>,
    pub attempted: bool,
    pub steps_until_justified: Option<usize>,
    pub steps_before: Option<usize>,
}

/// Attempts needed in the window after a hint: 2 of 3 steps for Next-Step,
/// 3 of 5 for Waypoint.
pub fn attempt_window(hint_type: HintType) -> (usize, usize) {
    match hint_type {
        HintType::NextStep => (3, 2),
        HintType::Waypoint => (5, 3),
    }
}

/// Whether the steps after a hint show the student working on it: enough of
/// the steps in the window target a statement sharing an atom with the hint.
/// A shorter tail needs a strict majority; no steps means not attempted.
/// `targets` holds each later step's target statement, `None` for steps that
/// named none.
pub fn classify_attempted(hint_type: HintType, hint: &Formula, targets: &[Option<Formula>]) -> bool {
    let (window, needed) = attempt_window(hint_type);
    let atoms = hint.atoms();
    let taken = &targets[..targets.len().min(window)];
    let qualifying = taken
        .iter()
        .flatten()
        .filter(|t| t.atoms().iter().any(|a| atoms.contains(a)))
        .count();
    if taken.len() >= window {
        qualifying >= needed
    } else {
        !taken.is_empty() && 2 * qualifying > taken.len()
    }
}

fn outcome_of(attempt: &AttemptReplay, h: &HintRecord) -> HintOutcome {
    let after: Vec<Option<Formula>> = attempt.steps[h.shown_after_steps..]
        .iter()
        .map(|s| s.statement.clone())
        .collect();
    let attempted = classify_attempted(h.hint_type, &h.statement, &after);
    let (status, unused_case, steps_before) = if h.justified() {
        (HintStatus::Justified, None, None)
    } else {
        let case = if attempt.outcome == AttemptOutcome::Completed {
            UnusedCase::SolvedWithout
        } else {
            UnusedCase::GaveUp
        };
        (HintStatus::Unused, Some(case), Some(after.len()))
    };
    HintOutcome {
        pid: attempt.pid.clone(),
        statement: h.statement.clone(),
        hint_type: h.hint_type,
        source: h.source,
        status,
        adopted: h.adopted,
        unused_case,
        attempted,
        steps_until_justified: h.justified_after,
        steps_before,
    }
}

pub fn hint_outcomes(attempt: &AttemptReplay) -> Vec<HintOutcome> {
    attempt.hints.iter().map(|h| outcome_of(attempt, h)).collect()
}

fn pct(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

fn mean(values: &[usize]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<usize>() as f64 / values.len() as f64
    }
}

pub fn aggregate_hints(outcomes: &[HintOutcome]) -> HintAggregates {
    let justified: Vec<&HintOutcome> = outcomes.iter().filter(|o| o.status == HintStatus::Justified).collect();
    let unused: Vec<&HintOutcome> = outcomes.iter().filter(|o| o.status == HintStatus::Unused).collect();
    let adopted = justified.iter().filter(|o| o.adopted == Some(true)).count();
    let attempted = unused.iter().filter(|o| o.attempted).count();
    let until: Vec<usize> = justified.iter().filter_map(|o| o.steps_until_justified).collect();
    let before: Vec<usize> = unused.iter().filter_map(|o| o.steps_before).collect();
    HintAggregates {
        total_added: outcomes.len(),
        justification_rate: pct(justified.len(), outcomes.len()),
        adoption_rate: pct(adopted, justified.len()),
        steps_until_justified: mean(&until),
        total_unused: unused.len(),
        pct_unused_of_total: pct(unused.len(), outcomes.len()),
        pct_attempted_of_unused: pct(attempted, unused.len()),
        steps_before: mean(&before),
        justified: justified.len(),
        adopted,
        gave_up: unused.iter().filter(|o| o.unused_case == Some(UnusedCase::GaveUp)).count(),
        solved_without: unused
            .iter()
            .filter(|o| o.unused_case == Some(UnusedCase::SolvedWithout))
            .count(),
        attempted,
    }
}

/// Metrics of one student from their replayed sessions.
pub fn metrics_from_replays<'a>(replays: impl IntoIterator<Item = &'a Replay>) -> SessionMetrics {
    let attempts: Vec<&AttemptReplay> = replays.into_iter().flat_map(|r| &r.attempts).collect();
    let student = attempts.first().map(|a| a.start.student.clone()).unwrap_or_default();
    let condition = attempts.iter().find_map(|a| a.start.condition);
    let mut phases = BTreeMap::new();
    for phase in Phase::ALL {
        let of_phase: Vec<&&AttemptReplay> = attempts.iter().filter(|a| a.phase() == phase).collect();
        let steps: usize = of_phase.iter().map(|a| a.steps.len()).sum();
        let valid: usize = of_phase.iter().map(|a| a.steps.iter().filter(|s| s.valid).count()).sum();
        phases.insert(
            phase,
            PhaseMetrics {
                total_time: of_phase.iter().fold(0.0, |t, a| t + a.minutes()),
                total_steps: steps,
                accuracy: pct(valid, steps),
                total_requests: of_phase.iter().map(|a| a.requests).sum(),
            },
        );
    }
    let outcomes: Vec<HintOutcome> = attempts.iter().flat_map(|a| hint_outcomes(a)).collect();
    SessionMetrics {
        student,
        condition,
        phases,
        hints: aggregate_hints(&outcomes),
    }
}

/// Replays one student's logs and computes their metrics.
pub fn compute_metrics(logs: &[SessionLog]) -> Result<SessionMetrics, CorruptLog> {
    let replays = logs.iter().map(replay).collect::<Result<Vec<_>, _>>()?;
    Ok(metrics_from_replays(&replays))
}

/// Metrics for every student in `logs`, grouped by the student named in
/// each session's `problem_start` events, ordered by student id.
pub fn metrics_by_student(logs: &[SessionLog]) -> Result<Vec<SessionMetrics>, CorruptLog> {
    let mut by_student: BTreeMap<String, Vec<Replay>> = BTreeMap::new();
    for log in logs {
        let r = replay(log)?;
        let student = r.student().unwrap_or(&r.sid).to_string();
        by_student.entry(student).or_default().push(r);
    }
    Ok(by_student.values().map(|rs| metrics_from_replays(rs)).collect())
}
