use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::logic::Formula;

use super::graph::{NodeId, NodeKind, ProofError, ProofState};

/// Fraction of historical solutions a statement must be necessary in to be
/// shown green.
pub const DEFAULT_GREEN_THRESHOLD: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeColor {
    Gray,
    Yellow,
    Green,
}

/// How often each statement was necessary across correct historical solutions.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusNodeStats {
    pub problem_id: String,
    pub solutions: usize,
    pub necessary: BTreeMap<Formula, usize>,
}

impl CorpusNodeStats {
    /// Tallies completed proofs; incomplete states are skipped.
    pub fn from_solutions<'a>(
        problem_id: &str,
        proofs: impl IntoIterator<Item = &'a ProofState>,
    ) -> CorpusNodeStats {
        let mut stats = CorpusNodeStats {
            problem_id: problem_id.to_string(),
            ..Default::default()
        };
        for proof in proofs {
            let Ok(needed) = proof.necessary_nodes() else { continue };
            stats.solutions += 1;
            let statements: BTreeSet<&Formula> = needed
                .iter()
                .filter_map(|id| proof.node(*id))
                .map(|n| &n.statement)
                .collect();
            for s in statements {
                *stats.necessary.entry(s.clone()).or_default() += 1;
            }
        }
        stats
    }

    pub fn necessary_fraction(&self, statement: &Formula) -> f64 {
        if self.solutions == 0 {
            return 0.0;
        }
        self.necessary.get(statement).copied().unwrap_or(0) as f64 / self.solutions as f64
    }
}

/// Colors every justified derived or hint node by how often its statement was
/// necessary in historical solutions.
pub fn color_nodes(
    state: &ProofState,
    stats: &CorpusNodeStats,
    green_threshold: f64,
) -> Result<BTreeMap<NodeId, NodeColor>, ProofError> {
    if stats.problem_id != state.problem_id || stats.solutions == 0 {
        return Err(ProofError::MissingStats(state.problem_id.clone()));
    }
    Ok(state
        .nodes()
        .iter()
        .filter(|n| matches!(n.kind, NodeKind::Derived | NodeKind::Hint) && n.is_justified())
        .map(|n| {
            let frac = stats.necessary_fraction(&n.statement);
            let color = if frac <= 0.0 {
                NodeColor::Gray
            } else if frac >= green_threshold {
                NodeColor::Green
            } else {
                NodeColor::Yellow
            };
            (n.id, color)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::RuleId;
    use crate::proof::{new_proof, ProblemDef};
    use crate::session::Phase;

    fn f(s: &str) -> Formula {
        s.parse().unwrap()
    }

    fn state_with(statements: &[&str]) -> ProofState {
        let p = ProblemDef {
            id: "p".into(),
            givens: vec![f("A&B&C")],
            conclusion: f("Z"),
            rules: RuleId::ALL.to_vec(),
            expert_length: 5,
            phase: Phase::Training,
            focus: String::new(),
            expert: vec![],
        };
        let mut s = new_proof(&p).unwrap();
        let given = s.givens().next().unwrap().id;
        for st in statements {
            s.attempt_step(&[given], RuleId::Add, Some(&f(st))).unwrap();
        }
        s
    }

    fn stats(entries: &[(&str, usize)], solutions: usize) -> CorpusNodeStats {
        CorpusNodeStats {
            problem_id: "p".into(),
            solutions,
            necessary: entries.iter().map(|(s, c)| (f(s), *c)).collect(),
        }
    }

    #[test]
    fn thresholds() {
        let s = state_with(&["A&B&C|D", "A&B&C|E", "A&B&C|F"]);
        let st = stats(&[("A&B&C|E", 8), ("A&B&C|F", 1)], 10);
        let colors = color_nodes(&s, &st, DEFAULT_GREEN_THRESHOLD).unwrap();
        let by_statement: BTreeMap<String, NodeColor> = colors
            .iter()
            .map(|(id, c)| (s.node(*id).unwrap().statement.render(), *c))
            .collect();
        assert_eq!(by_statement["A&B&C|D"], NodeColor::Gray);
        assert_eq!(by_statement["A&B&C|E"], NodeColor::Green);
        assert_eq!(by_statement["A&B&C|F"], NodeColor::Yellow);
    }

    #[test]
    fn threshold_is_inclusive() {
        let s = state_with(&["A&B&C|D"]);
        let colors = color_nodes(&s, &stats(&[("A&B&C|D", 3)], 10), 0.3).unwrap();
        assert_eq!(colors.values().next(), Some(&NodeColor::Green));
    }

    #[test]
    fn missing_stats() {
        let s = state_with(&[]);
        let mut st = stats(&[], 0);
        assert!(matches!(color_nodes(&s, &st, 0.3), Err(ProofError::MissingStats(_))));
        st.solutions = 3;
        st.problem_id = "other".into();
        assert!(matches!(color_nodes(&s, &st, 0.3), Err(ProofError::MissingStats(_))));
    }
}
