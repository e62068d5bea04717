use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use prooftutor_core::hints::{HintSource, HintType};
use prooftutor_core::logic::{Formula, RuleId};
use prooftutor_core::proof::{
    color_nodes, CorpusNodeStats, HintMeta, NodeColor, NodeId, NodeKind, ProblemDef, ProofState, StateKey,
    DEFAULT_GREEN_THRESHOLD,
};
use prooftutor_core::session::{CurriculumRun, LiveAttempt, Phase, ShownHint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemView {
    pub id: String,
    pub phase: Phase,
    pub givens: Vec<Formula>,
    pub conclusion: Formula,
    pub rules: Vec<RuleId>,
    pub focus: String,
    pub expert_length: usize,
}

impl From<(Phase, &ProblemDef)> for ProblemView {
    fn from((phase, p): (Phase, &ProblemDef)) -> Self {
        ProblemView {
            id: p.id.clone(),
            phase,
            givens: p.givens.clone(),
            conclusion: p.conclusion.clone(),
            rules: p.rules.clone(),
            focus: p.focus.clone(),
            expert_length: p.expert_length,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeView {
    pub id: NodeId,
    pub statement: Formula,
    pub kind: NodeKind,
    pub label: Option<usize>,
    pub rule: Option<RuleId>,
    pub parents: Vec<NodeId>,
    pub justified: bool,
    /// Unjustified hint nodes and the open conclusion show a `?`.
    pub question: bool,
    pub hint: Option<HintMeta>,
    pub color: Option<NodeColor>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofView {
    pub nodes: Vec<NodeView>,
    pub state_key: StateKey,
    pub complete: bool,
    pub step_count: usize,
    pub error_count: usize,
}

impl ProofView {
    pub fn node(&self, id: NodeId) -> Option<&NodeView> {
        self.nodes.iter().find(|n| n.id == id)
    }

    /// Justified node showing `statement`.
    pub fn justified_id(&self, statement: &Formula) -> Option<NodeId> {
        self.nodes
            .iter()
            .find(|n| n.justified && &n.statement == statement)
            .map(|n| n.id)
    }

    pub fn pending_hint(&self) -> Option<&NodeView> {
        self.nodes.iter().find(|n| n.kind == NodeKind::Hint && !n.justified)
    }
}

/// One step of a worked example, ready to post to the steps endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptedStep {
    pub premises: Vec<NodeId>,
    pub rule: RuleId,
    pub claimed: Formula,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptView {
    pub problem: ProblemView,
    pub attempt: u32,
    pub worked_example: bool,
    pub proof: ProofView,
    /// Unsolicited hints still available in this attempt; absent outside training.
    pub hints_remaining: Option<usize>,
    pub hints_enabled: bool,
    pub skip_enabled: bool,
    /// Next click of a worked example.
    pub next_scripted_step: Option<ScriptedStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiSession {
    pub sid: String,
    pub student: String,
    pub condition: HintType,
    pub phase: Option<Phase>,
    pub position: usize,
    pub total: usize,
    pub finished: bool,
    pub current: Option<AttemptView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HintView {
    pub node: NodeId,
    pub statement: Formula,
    pub hint_type: HintType,
    pub source: HintSource,
    pub depth: u8,
    pub value: Option<f64>,
}

impl From<&ShownHint> for HintView {
    fn from(s: &ShownHint) -> Self {
        HintView {
            node: s.node,
            statement: s.hint.statement.clone(),
            hint_type: s.hint.hint_type,
            source: s.hint.source,
            depth: s.hint.depth,
            value: s.hint.value,
        }
    }
}

pub fn proof_view(state: &ProofState, stats: Option<&CorpusNodeStats>) -> ProofView {
    let colors: BTreeMap<NodeId, NodeColor> = stats
        .and_then(|s| color_nodes(state, s, DEFAULT_GREEN_THRESHOLD).ok())
        .unwrap_or_default();
    let nodes = state
        .nodes()
        .iter()
        .map(|n| NodeView {
            id: n.id,
            statement: n.statement.clone(),
            kind: n.kind,
            label: n.label,
            rule: n.justification.as_ref().map(|j| j.rule),
            parents: n.justification.as_ref().map(|j| j.parents.clone()).unwrap_or_default(),
            justified: n.is_justified(),
            question: matches!(n.kind, NodeKind::Hint | NodeKind::Conclusion) && !n.is_justified(),
            hint: n.hint,
            color: colors.get(&n.id).copied(),
        })
        .collect();
    ProofView {
        nodes,
        state_key: state.state_key(),
        complete: state.is_complete(),
        step_count: state.step_count,
        error_count: state.error_count,
    }
}

fn next_scripted_step(a: &LiveAttempt) -> Option<ScriptedStep> {
    if !a.worked_example {
        return None;
    }
    let justified: BTreeMap<Formula, NodeId> = a
        .state
        .justified_nodes()
        .into_iter()
        .map(|n| (n.statement.clone(), n.id))
        .collect();
    let step = a.problem.expert.iter().find(|s| !justified.contains_key(&s.conclusion))?;
    let premises = step
        .premises
        .iter()
        .map(|p| justified.get(p).copied())
        .collect::<Option<Vec<_>>>()?;
    Some(ScriptedStep {
        premises,
        rule: step.rule,
        claimed: step.conclusion.clone(),
    })
}

pub fn attempt_view(a: &LiveAttempt, stats: Option<&CorpusNodeStats>) -> AttemptView {
    AttemptView {
        problem: (a.phase, &a.problem).into(),
        attempt: a.attempt,
        worked_example: a.worked_example,
        proof: proof_view(&a.state, stats),
        hints_remaining: a.scheduler.as_ref().map(|s| s.remaining()),
        hints_enabled: a.phase.hints_enabled() && !a.worked_example,
        skip_enabled: a.phase.skip_enabled(),
        next_scripted_step: next_scripted_step(a),
    }
}

pub fn session_view(run: &CurriculumRun, condition: HintType, stats: &BTreeMap<String, CorpusNodeStats>) -> ApiSession {
    let current = run.current().map(|a| attempt_view(a, stats.get(&a.problem.id)));
    ApiSession {
        sid: run.session.sid.clone(),
        student: run.session.student.clone(),
        condition,
        phase: run.phase(),
        position: run.position(),
        total: run.len(),
        finished: run.finished(),
        current,
    }
}
