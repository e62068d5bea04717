//! Propositional formulas, the ASCII grammar, truth-table semantics and the
//! rule catalog.

mod formula;
mod parse;
mod rules;
mod semantics;

pub use formula::{Connective, Formula};
pub use parse::{parse, ParseError};
pub use rules::{
    applicable_rules, can_conclude, enumerate_conclusions, validate_derivation, Rule, RuleError, RuleId,
    RuleKind, RuleOutcome, Schema, UnknownRule,
};
pub use semantics::{entails, equivalent, TooManyAtoms, MAX_ENTAILMENT_ATOMS};

/// Premise selections a student can make from `count` distinct statements:
/// every single statement and every ordered pair of distinct statements.
pub fn premise_selections(count: usize) -> impl Iterator<Item = Vec<usize>> {
    let singles = (0..count).map(|i| vec![i]);
    let pairs = (0..count).flat_map(move |i| {
        (0..count).filter(move |&j| j != i).map(move |j| vec![i, j])
    });
    singles.chain(pairs)
}

/// A premise selection (indices into `statements`) and rule that derive
/// `target` in one application, if any.
pub fn find_one_step(statements: &[Formula], target: &Formula, catalog: &[RuleId]) -> Option<(Vec<usize>, RuleId)> {
    find_one_step_using(statements, target, catalog, None)
}

/// As [`find_one_step`], restricted to selections that include statement
/// `using` when given.
pub fn find_one_step_using(
    statements: &[Formula],
    target: &Formula,
    catalog: &[RuleId],
    using: Option<usize>,
) -> Option<(Vec<usize>, RuleId)> {
    let rules: Vec<RuleId> = catalog.iter().copied().filter(|&r| can_conclude(r, target)).collect();
    if rules.is_empty() {
        return None;
    }
    let selections = premise_selections(statements.len()).filter(|sel| using.is_none_or(|u| sel.contains(&u)));
    selections.into_iter().find_map(|sel| {
        let premises: Vec<Formula> = sel.iter().map(|&i| statements[i].clone()).collect();
        rules
            .iter()
            .filter(|r| r.arity() == premises.len())
            .find(|&&r| validate_derivation(r, &premises, target).unwrap_or(false))
            .map(|&r| (sel.clone(), r))
    })
}

/// Whether `target` follows from some selection of `statements` by one
/// application of a rule in `catalog`.
pub fn derivable_in_one_step(statements: &[Formula], target: &Formula, catalog: &[RuleId]) -> bool {
    find_one_step(statements, target, catalog).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_step_derivability() {
        let s: Vec<Formula> = ["I&F", "F->G&~H", "J"].iter().map(|x| x.parse().unwrap()).collect();
        let all = RuleId::ALL;
        assert!(derivable_in_one_step(&s, &"F".parse().unwrap(), &all));
        assert!(!derivable_in_one_step(&s, &"G&~H".parse().unwrap(), &all));
        assert!(derivable_in_one_step(&s, &"J|Z".parse().unwrap(), &all));
        assert!(!derivable_in_one_step(&s, &"F".parse().unwrap(), &[RuleId::MP]));
    }

    #[test]
    fn selection_counts() {
        assert_eq!(premise_selections(3).count(), 3 + 6);
        assert_eq!(premise_selections(0).count(), 0);
    }
}
