use std::collections::{BTreeSet, HashSet};
use std::rc::Rc;

use crate::logic::{enumerate_conclusions, find_one_step_using, premise_selections, Formula, RuleId, RuleOutcome};
use crate::proof::ScriptStep;

/// Frontier size beyond which a search level is truncated.
const FRONTIER_LIMIT: usize = 4_000;

/// Formulas an exploratory derivation may introduce with Add or Conj: the
/// subformulas of what is on screen and of the target.
fn relevant(statements: &[Formula], target: &Formula) -> HashSet<Formula> {
    statements
        .iter()
        .chain(std::iter::once(target))
        .flat_map(|f| f.subformulas())
        .cloned()
        .collect()
}

/// One-step derivations of new statements, one per conclusion. With
/// `inherited` (the successors of the state without its newest statement)
/// only selections using the newest statement are enumerated.
fn successors(
    statements: &[Formula],
    catalog: &[RuleId],
    relevant: &HashSet<Formula>,
    size_cap: usize,
    inherited: Option<&[ScriptStep]>,
) -> Vec<ScriptStep> {
    let present: HashSet<&Formula> = statements.iter().collect();
    let newest = statements.len().saturating_sub(1);
    let mut out: Vec<ScriptStep> = match inherited {
        Some(steps) => steps.iter().filter(|s| !present.contains(&s.conclusion)).cloned().collect(),
        None => Vec::new(),
    };
    let selections = premise_selections(statements.len()).filter(|sel| inherited.is_none() || sel.contains(&newest));
    for sel in selections {
        let premises: Vec<Formula> = sel.iter().map(|&i| statements[i].clone()).collect();
        for &rule in catalog.iter().filter(|r| r.arity() == premises.len()) {
            let conclusions: Vec<Formula> = match enumerate_conclusions(rule, &premises) {
                Err(_) => continue,
                Ok(RuleOutcome::Finite(set)) => set
                    .into_iter()
                    .filter(|c| rule != RuleId::Conj || relevant.contains(c))
                    .collect(),
                Ok(RuleOutcome::Unbounded) => relevant
                    .iter()
                    .filter(|r| matches!(r, Formula::Or(l, _) if **l == premises[0]))
                    .cloned()
                    .collect(),
            };
            for c in conclusions {
                if c.size() <= size_cap && !present.contains(&c) {
                    out.push(ScriptStep {
                        premises: premises.clone(),
                        rule,
                        conclusion: c,
                    });
                }
            }
        }
    }
    out.sort_by(|a, b| (&a.conclusion, a.rule, &a.premises).cmp(&(&b.conclusion, b.rule, &b.premises)));
    out.dedup_by(|a, b| a.conclusion == b.conclusion);
    out
}

/// A shortest derivation of `target` from `statements` of at most
/// `max_depth` rule applications, found by breadth-first search.
pub fn plan_derivation(
    statements: &[Formula],
    target: &Formula,
    catalog: &[RuleId],
    max_depth: usize,
) -> Option<Vec<ScriptStep>> {
    if statements.contains(target) {
        return Some(Vec::new());
    }
    let relevant = relevant(statements, target);
    let size_cap = relevant.iter().map(Formula::size).max().unwrap_or(1) + 2;
    let mut frontier: Vec<(Vec<Formula>, Vec<ScriptStep>, Option<Rc<Vec<ScriptStep>>>)> =
        vec![(statements.to_vec(), Vec::new(), None)];
    let mut seen: HashSet<BTreeSet<Formula>> = HashSet::new();
    for depth in 1..=max_depth {
        for (stmts, path, _) in &frontier {
            let newest = (stmts.len() > statements.len()).then(|| stmts.len() - 1);
            if let Some((sel, rule)) = find_one_step_using(stmts, target, catalog, newest) {
                let mut path = path.clone();
                path.push(ScriptStep {
                    premises: sel.iter().map(|&i| stmts[i].clone()).collect(),
                    rule,
                    conclusion: target.clone(),
                });
                return Some(path);
            }
        }
        if depth == max_depth {
            break;
        }
        let mut next = Vec::new();
        'outer: for (stmts, path, inherited) in &frontier {
            let succ = Rc::new(successors(stmts, catalog, &relevant, size_cap, inherited.as_deref().map(Vec::as_slice)));
            for step in succ.iter().cloned() {
                let mut grown = stmts.clone();
                grown.push(step.conclusion.clone());
                let added: BTreeSet<Formula> = grown[statements.len()..].iter().cloned().collect();
                if !seen.insert(added) {
                    continue;
                }
                let mut p = path.clone();
                p.push(step);
                next.push((grown, p, Some(Rc::clone(&succ))));
                if next.len() >= FRONTIER_LIMIT {
                    break 'outer;
                }
            }
        }
        frontier = next;
    }
    None
}
