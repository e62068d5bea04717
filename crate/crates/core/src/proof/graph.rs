use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::hints::{HintSource, HintType};
use crate::logic::{enumerate_conclusions, validate_derivation, Formula, RuleError, RuleId, RuleOutcome};

use super::problem::ProblemDef;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Given,
    Derived,
    Conclusion,
    Hint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Justification {
    pub rule: RuleId,
    pub parents: Vec<NodeId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HintMeta {
    pub hint_type: HintType,
    pub source: HintSource,
    pub depth: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofNode {
    pub id: NodeId,
    pub statement: Formula,
    pub kind: NodeKind,
    pub justification: Option<Justification>,
    /// Display ordinal, assigned in justification order. Givens are `1..=k`.
    pub label: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hint: Option<HintMeta>,
}

impl ProofNode {
    /// Givens and nodes with a justification.
    pub fn is_justified(&self) -> bool {
        self.kind == NodeKind::Given || self.justification.is_some()
    }
}

/// Mistakes a student makes while attempting a step. Each counts as an error.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StepError {
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error("{claimed} does not follow from the selected statements by {rule}")]
    InvalidClaim { rule: RuleId, claimed: Formula },
    #[error("{0} is not available for this problem")]
    RuleNotAvailable(RuleId),
    #[error("Statement {0} has not been justified yet")]
    UnjustifiedPremise(Formula),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProofError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("node {0} selected twice")]
    DuplicatePremise(NodeId),
    #[error("the proof is already complete")]
    AlreadyComplete,
    #[error("the proof is not complete")]
    Incomplete,
    #[error("a hint is already in the workspace")]
    HintAlreadyPresent,
    #[error("hint statement {0} is already in the workspace")]
    RedundantHint(Formula),
    #[error("givens and the conclusion cannot be deleted")]
    ProtectedNode(NodeId),
    #[error("no historical statistics for problem {0}")]
    MissingStats(String),
}

/// Result of one rule selection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum StepOutcome {
    Derived {
        node: NodeId,
        statement: Formula,
        justified_hint: bool,
        completed: bool,
    },
    /// The rule applies but the student must type the statement.
    /// `options` is `None` when any statement of the right shape is allowed.
    NeedsInput { options: Option<Vec<Formula>> },
    /// Valid derivation of a statement that is already justified.
    Redundant { existing: NodeId },
    Rejected { error: StepError },
}

impl Serialize for StepError {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DeleteReport {
    /// Removed nodes with their statements, in justification order.
    pub removed: Vec<(NodeId, Formula)>,
    /// Hint nodes that lost their justification and show `?` again.
    pub reverted: Vec<NodeId>,
}

/// One live problem attempt: givens, conclusion, derived and hint nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofState {
    pub problem_id: String,
    pub catalog: Vec<RuleId>,
    nodes: Vec<ProofNode>,
    conclusion: NodeId,
    next_id: usize,
    next_label: usize,
    pub error_count: usize,
    pub step_count: usize,
    pub started_at: u64,
    pub ended_at: Option<u64>,
}

/// Canonical, order-independent identity of a proof state: the sorted,
/// de-duplicated rendered statements of every justified node.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateKey(String);

pub const KEY_SEPARATOR: char = ';';

impl StateKey {
    pub fn from_statements<'a>(statements: impl IntoIterator<Item = &'a Formula>) -> StateKey {
        let set: BTreeSet<String> = statements.into_iter().map(Formula::render).collect();
        StateKey(set.into_iter().collect::<Vec<_>>().join(&KEY_SEPARATOR.to_string()))
    }

    /// Accepts a previously rendered key; the text is re-canonicalised.
    pub fn parse(text: &str) -> Result<StateKey, crate::logic::ParseError> {
        let statements = text
            .split(KEY_SEPARATOR)
            .filter(|s| !s.trim().is_empty())
            .map(crate::logic::parse)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(StateKey::from_statements(&statements))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn statements(&self) -> Vec<Formula> {
        self.0
            .split(KEY_SEPARATOR)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().expect("state keys hold rendered formulas"))
            .collect()
    }
}

impl fmt::Display for StateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Creates the initial state for `problem`: givens plus an unjustified conclusion.
pub fn new_proof(problem: &ProblemDef) -> Result<ProofState, ProofError> {
    problem.check().map_err(ProofError::InvalidProblem)?;
    let mut nodes = Vec::with_capacity(problem.givens.len() + 1);
    for (i, g) in problem.givens.iter().enumerate() {
        nodes.push(ProofNode {
            id: NodeId(i),
            statement: g.clone(),
            kind: NodeKind::Given,
            justification: None,
            label: Some(i + 1),
            hint: None,
        });
    }
    let conclusion = NodeId(problem.givens.len());
    nodes.push(ProofNode {
        id: conclusion,
        statement: problem.conclusion.clone(),
        kind: NodeKind::Conclusion,
        justification: None,
        label: None,
        hint: None,
    });
    Ok(ProofState {
        problem_id: problem.id.clone(),
        catalog: problem.rules.clone(),
        next_id: nodes.len(),
        next_label: problem.givens.len() + 1,
        nodes,
        conclusion,
        error_count: 0,
        step_count: 0,
        started_at: 0,
        ended_at: None,
    })
}

impl ProofState {
    pub fn nodes(&self) -> &[ProofNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> Option<&ProofNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn conclusion(&self) -> &ProofNode {
        self.node(self.conclusion).expect("conclusion node is never removed")
    }

    pub fn givens(&self) -> impl Iterator<Item = &ProofNode> {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Given)
    }

    /// `(parent, child)` arrows, one per justification parent.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for n in &self.nodes {
            if let Some(j) = &n.justification {
                out.extend(j.parents.iter().map(|&p| (p, n.id)));
            }
        }
        out
    }

    pub fn is_complete(&self) -> bool {
        self.conclusion().justification.is_some()
    }

    /// The unjustified hint node, if one is on screen.
    pub fn pending_hint(&self) -> Option<&ProofNode> {
        self.nodes
            .iter()
            .find(|n| n.kind == NodeKind::Hint && n.justification.is_none())
    }

    /// Justified nodes ordered by justification time (label order).
    pub fn justified_nodes(&self) -> Vec<&ProofNode> {
        let mut out: Vec<&ProofNode> = self.nodes.iter().filter(|n| n.is_justified()).collect();
        out.sort_by_key(|n| n.label);
        out
    }

    /// Statements of justified nodes, givens first, then in derivation order.
    pub fn justified_statements(&self) -> Vec<Formula> {
        self.justified_nodes().into_iter().map(|n| n.statement.clone()).collect()
    }

    pub fn state_key(&self) -> StateKey {
        StateKey::from_statements(self.nodes.iter().filter(|n| n.is_justified()).map(|n| &n.statement))
    }

    fn find_statement(&self, statement: &Formula) -> Option<&ProofNode> {
        self.nodes.iter().find(|n| &n.statement == statement)
    }

    /// Applies `rule` to the selected premises. Student mistakes come back as
    /// [`StepOutcome::Rejected`] and bump `error_count`; `step_count` grows on
    /// every completed attempt but not when the tutor asks for input.
    pub fn attempt_step(
        &mut self,
        premise_ids: &[NodeId],
        rule: RuleId,
        claimed: Option<&Formula>,
    ) -> Result<StepOutcome, ProofError> {
        if self.is_complete() {
            return Err(ProofError::AlreadyComplete);
        }
        let mut premise_nodes = Vec::with_capacity(premise_ids.len());
        for (i, &id) in premise_ids.iter().enumerate() {
            if premise_ids[..i].contains(&id) {
                return Err(ProofError::DuplicatePremise(id));
            }
            premise_nodes.push(self.node(id).ok_or(ProofError::UnknownNode(id))?);
        }
        let premises: Vec<Formula> = premise_nodes.iter().map(|n| n.statement.clone()).collect();

        let verdict = if !self.catalog.contains(&rule) {
            Err(StepError::RuleNotAvailable(rule))
        } else if let Some(n) = premise_nodes.iter().find(|n| !n.is_justified()) {
            Err(StepError::UnjustifiedPremise(n.statement.clone()))
        } else {
            match (enumerate_conclusions(rule, &premises), claimed) {
                (Err(e), _) => Err(StepError::Rule(e)),
                (Ok(RuleOutcome::Finite(set)), None) if set.len() == 1 => {
                    Ok(set.into_iter().next())
                }
                (Ok(RuleOutcome::Finite(set)), None) => {
                    return Ok(StepOutcome::NeedsInput {
                        options: Some(set.into_iter().collect()),
                    })
                }
                (Ok(RuleOutcome::Unbounded), None) => {
                    return Ok(StepOutcome::NeedsInput { options: None })
                }
                (Ok(_), Some(c)) => match validate_derivation(rule, &premises, c) {
                    Ok(true) => Ok(Some(c.clone())),
                    Ok(false) => Err(StepError::InvalidClaim {
                        rule,
                        claimed: c.clone(),
                    }),
                    Err(e) => Err(StepError::Rule(e)),
                },
            }
        };

        self.step_count += 1;
        let statement = match verdict {
            Err(error) => {
                self.error_count += 1;
                return Ok(StepOutcome::Rejected { error });
            }
            Ok(s) => s.expect("derivation produced a statement"),
        };
        let justification = Justification {
            rule,
            parents: premise_ids.to_vec(),
        };
        let label = self.next_label;
        if let Some(existing) = self.find_statement(&statement) {
            let (id, kind) = (existing.id, existing.kind);
            if existing.is_justified() {
                return Ok(StepOutcome::Redundant { existing: id });
            }
            self.next_label += 1;
            let node = self.nodes.iter_mut().find(|n| n.id == id).expect("node exists");
            node.justification = Some(justification);
            node.label = Some(label);
            return Ok(StepOutcome::Derived {
                node: id,
                statement,
                justified_hint: kind == NodeKind::Hint,
                completed: kind == NodeKind::Conclusion,
            });
        }
        self.next_label += 1;
        let id = NodeId(self.next_id);
        self.next_id += 1;
        self.nodes.push(ProofNode {
            id,
            statement: statement.clone(),
            kind: NodeKind::Derived,
            justification: Some(justification),
            label: Some(label),
            hint: None,
        });
        Ok(StepOutcome::Derived {
            node: id,
            statement,
            justified_hint: false,
            completed: false,
        })
    }

    /// Puts an unjustified hint node with `statement` into the workspace.
    pub fn add_hint_node(&mut self, statement: Formula, meta: HintMeta) -> Result<NodeId, ProofError> {
        if self.is_complete() {
            return Err(ProofError::AlreadyComplete);
        }
        if self.pending_hint().is_some() {
            return Err(ProofError::HintAlreadyPresent);
        }
        if self.find_statement(&statement).is_some() {
            return Err(ProofError::RedundantHint(statement));
        }
        let id = NodeId(self.next_id);
        self.next_id += 1;
        self.nodes.push(ProofNode {
            id,
            statement,
            kind: NodeKind::Hint,
            justification: None,
            label: None,
            hint: Some(meta),
        });
        Ok(id)
    }

    /// Nodes a deletion of `id` takes with it, and hint nodes it un-justifies.
    pub fn cascade_removal(&self, id: NodeId) -> (BTreeSet<NodeId>, BTreeSet<NodeId>) {
        let mut removed = BTreeSet::from([id]);
        let mut reverted = BTreeSet::new();
        let mut pending_hint = self.pending_hint().map(|n| n.id).filter(|&h| h != id);
        for n in self.justified_nodes() {
            let Some(j) = &n.justification else { continue };
            if n.id == id || !j.parents.iter().any(|p| removed.contains(p) || reverted.contains(p)) {
                continue;
            }
            if n.kind == NodeKind::Hint && pending_hint.is_none() {
                reverted.insert(n.id);
                pending_hint = Some(n.id);
            } else {
                removed.insert(n.id);
            }
        }
        (removed, reverted)
    }

    /// Deletes a derived or hint node and everything justified through it.
    pub fn delete_node(&mut self, id: NodeId) -> Result<DeleteReport, ProofError> {
        let node = self.node(id).ok_or(ProofError::UnknownNode(id))?;
        if matches!(node.kind, NodeKind::Given | NodeKind::Conclusion) {
            return Err(ProofError::ProtectedNode(id));
        }
        if self.is_complete() {
            return Err(ProofError::AlreadyComplete);
        }
        let (removed, reverted) = self.cascade_removal(id);
        let mut report = DeleteReport::default();
        let mut ordered: Vec<&ProofNode> = self.nodes.iter().filter(|n| removed.contains(&n.id)).collect();
        ordered.sort_by_key(|n| (n.label.is_none(), n.label, n.id));
        report.removed = ordered.iter().map(|n| (n.id, n.statement.clone())).collect();
        self.nodes.retain(|n| !removed.contains(&n.id));
        for n in self.nodes.iter_mut().filter(|n| reverted.contains(&n.id)) {
            n.justification = None;
            n.label = None;
        }
        report.reverted = reverted.into_iter().collect();
        Ok(report)
    }

    /// Nodes on some justification path from the givens to the conclusion.
    pub fn necessary_nodes(&self) -> Result<BTreeSet<NodeId>, ProofError> {
        if !self.is_complete() {
            return Err(ProofError::Incomplete);
        }
        let mut seen = BTreeSet::from([self.conclusion]);
        let mut queue = VecDeque::from([self.conclusion]);
        while let Some(id) = queue.pop_front() {
            let Some(j) = self.node(id).and_then(|n| n.justification.as_ref()) else { continue };
            for &p in &j.parents {
                if seen.insert(p) {
                    queue.push_back(p);
                }
            }
        }
        Ok(seen)
    }

    /// Index from statement to node, for clients that address nodes by text.
    pub fn ids_by_statement(&self) -> BTreeMap<Formula, NodeId> {
        self.nodes.iter().map(|n| (n.statement.clone(), n.id)).collect()
    }
}
