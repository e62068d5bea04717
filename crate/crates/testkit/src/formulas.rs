use std::collections::BTreeMap;

use proptest::prelude::*;
use prooftutor_core::logic::{enumerate_conclusions, Formula, RuleId, RuleOutcome, Schema};
use rand::Rng;

/// Formulas over `atoms` of depth at most `depth`.
pub fn arb_formula(atoms: &'static str, depth: u32) -> impl Strategy<Value = Formula> {
    let letters: Vec<char> = atoms.chars().collect();
    let leaf = proptest::sample::select(letters).prop_map(Formula::atom);
    leaf.prop_recursive(depth, 64, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::and(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::or(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::implies(l, r)),
            (inner.clone(), inner).prop_map(|(l, r)| Formula::iff(l, r)),
        ]
    })
}

pub fn random_formula<R: Rng>(rng: &mut R, atoms: &[char], depth: usize) -> Formula {
    if depth == 0 || rng.random_bool(0.3) {
        return Formula::atom(atoms[rng.random_range(0..atoms.len())]);
    }
    let connective = rng.random_range(0..5);
    let mut sub = || random_formula(rng, atoms, depth - 1);
    match connective {
        0 => Formula::not(sub()),
        1 => Formula::and(sub(), sub()),
        2 => Formula::or(sub(), sub()),
        3 => Formula::implies(sub(), sub()),
        _ => Formula::iff(sub(), sub()),
    }
}

/// Replaces the schema letters of `pattern` by their bound formulas.
pub fn substitute(pattern: &Formula, map: &BTreeMap<char, Formula>) -> Formula {
    match pattern {
        Formula::Atom(c) => map.get(c).cloned().unwrap_or_else(|| pattern.clone()),
        Formula::Not(a) => Formula::not(substitute(a, map)),
        Formula::And(l, r) => Formula::and(substitute(l, map), substitute(r, map)),
        Formula::Or(l, r) => Formula::or(substitute(l, map), substitute(r, map)),
        Formula::Implies(l, r) => Formula::implies(substitute(l, map), substitute(r, map)),
        Formula::Iff(l, r) => Formula::iff(substitute(l, map), substitute(r, map)),
    }
}

#[derive(Debug, Clone)]
pub struct FuzzedStep {
    pub rule: RuleId,
    pub premises: Vec<Formula>,
    pub conclusion: Formula,
}

/// A valid application of `rule`: schema letters bound to random formulas
/// over `atoms`, one of the kernel's conclusions picked at random.
pub fn fuzz_step<R: Rng>(rng: &mut R, rule: RuleId, atoms: &[char]) -> FuzzedStep {
    let schemas = &rule.rule().schemas;
    let schema = &schemas[rng.random_range(0..schemas.len())];
    let map: BTreeMap<char, Formula> = ['P', 'Q', 'R', 'S']
        .into_iter()
        .map(|c| (c, random_formula(rng, atoms, 2)))
        .collect();
    let premises = match schema {
        Schema::Infer { premises, .. } => premises.iter().map(|p| substitute(p, &map)).collect(),
        Schema::Introduce { premise, .. } => vec![substitute(premise, &map)],
        Schema::Equiv(l, r) => vec![substitute(if rng.random_bool(0.5) { l } else { r }, &map)],
    };
    let conclusion = match enumerate_conclusions(rule, &premises).expect("instantiated schema applies") {
        RuleOutcome::Finite(set) => {
            let all: Vec<Formula> = set.into_iter().collect();
            all[rng.random_range(0..all.len())].clone()
        }
        RuleOutcome::Unbounded => Formula::or(premises[0].clone(), random_formula(rng, atoms, 2)),
    };
    FuzzedStep {
        rule,
        premises,
        conclusion,
    }
}
