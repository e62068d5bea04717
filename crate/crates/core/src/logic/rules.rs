//! The rule catalog: eight inference rules and ten replacement rules.
//!
//! Every rule is described by schemas written in the formula grammar, where
//! each atom letter is a schema variable. Replacement rules are equivalences
//! applied in either direction at the top level of a single premise.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use super::formula::Formula;
use super::parse::parse;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RuleId {
    MP,
    MT,
    DS,
    HS,
    Simp,
    Conj,
    Add,
    CD,
    DN,
    DeM,
    Impl,
    Trans,
    Equiv,
    Exp,
    Taut,
    Com,
    Assoc,
    Dist,
}

impl RuleId {
    pub const ALL: [RuleId; 18] = [
        RuleId::MP,
        RuleId::MT,
        RuleId::DS,
        RuleId::HS,
        RuleId::Simp,
        RuleId::Conj,
        RuleId::Add,
        RuleId::CD,
        RuleId::DN,
        RuleId::DeM,
        RuleId::Impl,
        RuleId::Trans,
        RuleId::Equiv,
        RuleId::Exp,
        RuleId::Taut,
        RuleId::Com,
        RuleId::Assoc,
        RuleId::Dist,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RuleId::MP => "MP",
            RuleId::MT => "MT",
            RuleId::DS => "DS",
            RuleId::HS => "HS",
            RuleId::Simp => "Simp",
            RuleId::Conj => "Conj",
            RuleId::Add => "Add",
            RuleId::CD => "CD",
            RuleId::DN => "DN",
            RuleId::DeM => "DeM",
            RuleId::Impl => "Impl",
            RuleId::Trans => "Trans",
            RuleId::Equiv => "Equiv",
            RuleId::Exp => "Exp",
            RuleId::Taut => "Taut",
            RuleId::Com => "Com",
            RuleId::Assoc => "Assoc",
            RuleId::Dist => "Dist",
        }
    }

    pub fn rule(self) -> &'static Rule {
        &CATALOG[self as usize]
    }

    pub fn arity(self) -> usize {
        self.rule().arity
    }

    pub fn kind(self) -> RuleKind {
        self.rule().kind
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown rule {0:?}")]
pub struct UnknownRule(pub String);

impl FromStr for RuleId {
    type Err = UnknownRule;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RuleId::ALL
            .into_iter()
            .find(|r| r.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownRule(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    Inference,
    Replacement,
}

#[derive(Debug, Clone)]
pub enum Schema {
    /// Premise patterns, in the order they are listed, yield the conclusion.
    Infer { premises: Vec<Formula>, conclusion: Formula },
    /// The conclusion contains a variable the premise does not bind.
    Introduce { premise: Formula, conclusion: Formula },
    /// Two interchangeable forms.
    Equiv(Formula, Formula),
}

#[derive(Debug, Clone)]
pub struct Rule {
    pub id: RuleId,
    pub kind: RuleKind,
    pub arity: usize,
    pub schemas: Vec<Schema>,
}

impl Rule {
    /// True when some conclusion of the rule is left to the user (Add).
    pub fn unbounded(&self) -> bool {
        self.schemas.iter().any(|s| matches!(s, Schema::Introduce { .. }))
    }
}

fn pat(s: &str) -> Formula {
    parse(s).expect("schema pattern parses")
}

fn infer(premises: &[&str], conclusion: &str) -> Schema {
    Schema::Infer {
        premises: premises.iter().map(|p| pat(p)).collect(),
        conclusion: pat(conclusion),
    }
}

fn equiv(l: &str, r: &str) -> Schema {
    Schema::Equiv(pat(l), pat(r))
}

static CATALOG: LazyLock<Vec<Rule>> = LazyLock::new(|| {
    RuleId::ALL
        .into_iter()
        .map(|id| {
            use RuleId::*;
            let schemas = match id {
                MP => vec![infer(&["P->Q", "P"], "Q")],
                MT => vec![infer(&["P->Q", "~Q"], "~P")],
                DS => vec![infer(&["P|Q", "~P"], "Q")],
                HS => vec![infer(&["P->Q", "Q->R"], "P->R")],
                Simp => vec![infer(&["P&Q"], "P"), infer(&["P&Q"], "Q")],
                Conj => vec![infer(&["P", "Q"], "P&Q")],
                Add => vec![Schema::Introduce {
                    premise: pat("P"),
                    conclusion: pat("P|Q"),
                }],
                CD => vec![infer(&["(P->Q)&(R->S)", "P|R"], "Q|S")],
                DN => vec![equiv("P", "~~P")],
                DeM => vec![equiv("~(P&Q)", "~P|~Q"), equiv("~(P|Q)", "~P&~Q")],
                Impl => vec![equiv("P->Q", "~P|Q")],
                Trans => vec![equiv("P->Q", "~Q->~P")],
                Equiv => vec![
                    equiv("P<->Q", "(P->Q)&(Q->P)"),
                    equiv("P<->Q", "P&Q|~P&~Q"),
                ],
                Exp => vec![equiv("P&Q->R", "P->Q->R")],
                Taut => vec![equiv("P", "P&P"), equiv("P", "P|P")],
                Com => vec![equiv("P&Q", "Q&P"), equiv("P|Q", "Q|P")],
                Assoc => vec![equiv("P&(Q&R)", "P&Q&R"), equiv("P|(Q|R)", "P|Q|R")],
                Dist => vec![equiv("P&(Q|R)", "P&Q|P&R"), equiv("P|Q&R", "(P|Q)&(P|R)")],
            };
            let kind = match id {
                MP | MT | DS | HS | Simp | Conj | Add | CD => RuleKind::Inference,
                _ => RuleKind::Replacement,
            };
            let arity = match &schemas[0] {
                Schema::Infer { premises, .. } => premises.len(),
                Schema::Introduce { .. } | Schema::Equiv(..) => 1,
            };
            Rule { id, kind, arity, schemas }
        })
        .collect()
});

/// Result of applying a rule to concrete premises.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleOutcome {
    /// The complete, non-empty set of possible conclusions.
    Finite(BTreeSet<Formula>),
    /// The user has to supply the conclusion.
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RuleError {
    #[error("Rule requires {}", if *.required == 1 { "one premise" } else { "two premises" })]
    ArityMismatch { rule: RuleId, required: usize, given: usize },
    #[error("{rule} cannot be applied to the selected statements")]
    NotApplicable { rule: RuleId },
}

type Bindings<'a> = [Option<&'a Formula>; 26];

fn slot(c: char) -> usize {
    (c as u8 - b'A') as usize
}

/// Structural match of `pattern` against `target`, extending `bindings`.
fn unify<'a>(pattern: &Formula, target: &'a Formula, bindings: &mut Bindings<'a>) -> bool {
    match (pattern, target) {
        (Formula::Atom(v), _) => match bindings[slot(*v)] {
            Some(bound) => bound == target,
            None => {
                bindings[slot(*v)] = Some(target);
                true
            }
        },
        (Formula::Not(p), Formula::Not(t)) => unify(p, t, bindings),
        (Formula::And(pl, pr), Formula::And(tl, tr))
        | (Formula::Or(pl, pr), Formula::Or(tl, tr))
        | (Formula::Implies(pl, pr), Formula::Implies(tl, tr))
        | (Formula::Iff(pl, pr), Formula::Iff(tl, tr)) => {
            unify(pl, tl, bindings) && unify(pr, tr, bindings)
        }
        _ => false,
    }
}

fn instantiate(pattern: &Formula, bindings: &Bindings<'_>) -> Option<Formula> {
    Some(match pattern {
        Formula::Atom(v) => bindings[slot(*v)]?.clone(),
        Formula::Not(p) => Formula::not(instantiate(p, bindings)?),
        Formula::And(l, r) => Formula::and(instantiate(l, bindings)?, instantiate(r, bindings)?),
        Formula::Or(l, r) => Formula::or(instantiate(l, bindings)?, instantiate(r, bindings)?),
        Formula::Implies(l, r) => {
            Formula::implies(instantiate(l, bindings)?, instantiate(r, bindings)?)
        }
        Formula::Iff(l, r) => Formula::iff(instantiate(l, bindings)?, instantiate(r, bindings)?),
    })
}

fn check_arity(rule: RuleId, premises: &[Formula]) -> Result<(), RuleError> {
    let required = rule.arity();
    if premises.len() != required {
        return Err(RuleError::ArityMismatch {
            rule,
            required,
            given: premises.len(),
        });
    }
    Ok(())
}

fn orderings(n: usize) -> &'static [[usize; 2]] {
    if n == 2 {
        &[[0, 1], [1, 0]]
    } else {
        &[[0, 0]]
    }
}

/// All conclusions one application of `rule` yields from `premises`, trying
/// both premise orders for two-premise rules.
pub fn enumerate_conclusions(rule: RuleId, premises: &[Formula]) -> Result<RuleOutcome, RuleError> {
    check_arity(rule, premises)?;
    let mut out = BTreeSet::new();
    for schema in &rule.rule().schemas {
        match schema {
            Schema::Infer { premises: pats, conclusion } => {
                for order in orderings(premises.len()) {
                    let mut b: Bindings<'_> = [None; 26];
                    let ok = pats
                        .iter()
                        .zip(order.iter())
                        .all(|(p, &i)| unify(p, &premises[i], &mut b));
                    if ok {
                        if let Some(c) = instantiate(conclusion, &b) {
                            out.insert(c);
                        }
                    }
                }
            }
            Schema::Introduce { premise, .. } => {
                let mut b: Bindings<'_> = [None; 26];
                if unify(premise, &premises[0], &mut b) {
                    return Ok(RuleOutcome::Unbounded);
                }
            }
            Schema::Equiv(l, r) => {
                for (from, to) in [(l, r), (r, l)] {
                    let mut b: Bindings<'_> = [None; 26];
                    if unify(from, &premises[0], &mut b) {
                        if let Some(c) = instantiate(to, &b) {
                            out.insert(c);
                        }
                    }
                }
            }
        }
    }
    if out.is_empty() {
        Err(RuleError::NotApplicable { rule })
    } else {
        Ok(RuleOutcome::Finite(out))
    }
}

/// Whether `claimed` follows from `premises` by one application of `rule`.
pub fn validate_derivation(
    rule: RuleId,
    premises: &[Formula],
    claimed: &Formula,
) -> Result<bool, RuleError> {
    match enumerate_conclusions(rule, premises)? {
        RuleOutcome::Finite(set) => Ok(set.contains(claimed)),
        RuleOutcome::Unbounded => Ok(rule.rule().schemas.iter().any(|s| match s {
            Schema::Introduce { premise, conclusion } => {
                let mut b: Bindings<'_> = [None; 26];
                unify(premise, &premises[0], &mut b) && unify(conclusion, claimed, &mut b)
            }
            _ => false,
        })),
    }
}

/// Whether some application of `rule` could produce `target`, judged by its
/// conclusion patterns alone. A cheap filter ahead of [`validate_derivation`].
pub fn can_conclude(rule: RuleId, target: &Formula) -> bool {
    rule.rule().schemas.iter().any(|s| {
        let fits = |p: &Formula| unify(p, target, &mut [None; 26]);
        match s {
            Schema::Infer { conclusion, .. } | Schema::Introduce { conclusion, .. } => fits(conclusion),
            Schema::Equiv(l, r) => fits(l) || fits(r),
        }
    })
}

/// Rules from `catalog` whose arity matches and whose schema applies.
pub fn applicable_rules(premises: &[Formula], catalog: &[RuleId]) -> BTreeSet<RuleId> {
    catalog
        .iter()
        .copied()
        .filter(|&r| enumerate_conclusions(r, premises).is_ok())
        .collect()
}
