use std::collections::{BTreeMap, BTreeSet, VecDeque};

use prooftutor_core::hints::{InteractionNetwork, Transition};
use prooftutor_core::logic::{enumerate_conclusions, Formula, RuleId, RuleOutcome};
use prooftutor_core::proof::{NodeId, ProofState, StateKey};

fn eval(f: &Formula, on: &BTreeSet<char>) -> bool {
    match f {
        Formula::Atom(c) => on.contains(c),
        Formula::Not(a) => !eval(a, on),
        Formula::And(l, r) => eval(l, on) && eval(r, on),
        Formula::Or(l, r) => eval(l, on) || eval(r, on),
        Formula::Implies(l, r) => !eval(l, on) || eval(r, on),
        Formula::Iff(l, r) => eval(l, on) == eval(r, on),
    }
}

fn collect_atoms(f: &Formula, out: &mut BTreeSet<char>) {
    match f {
        Formula::Atom(c) => {
            out.insert(*c);
        }
        Formula::Not(a) => collect_atoms(a, out),
        Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) | Formula::Iff(l, r) => {
            collect_atoms(l, out);
            collect_atoms(r, out);
        }
    }
}

/// Truth-table entailment by enumerating every assignment.
pub fn tt_entails(premises: &[Formula], conclusion: &Formula) -> bool {
    let mut atoms = BTreeSet::new();
    for f in premises.iter().chain([conclusion]) {
        collect_atoms(f, &mut atoms);
    }
    let atoms: Vec<char> = atoms.into_iter().collect();
    assert!(atoms.len() <= 20, "too many atoms for the oracle");
    (0u32..1 << atoms.len()).all(|mask| {
        let on: BTreeSet<char> = atoms
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, c)| *c)
            .collect();
        !premises.iter().all(|p| eval(p, &on)) || eval(conclusion, &on)
    })
}

/// Nodes whose removal, with everything justified through them, leaves the
/// conclusion unjustified.
pub fn necessary_by_deletion(state: &ProofState) -> BTreeSet<NodeId> {
    let justified: Vec<_> = state.nodes().iter().filter(|n| n.is_justified()).collect();
    let conclusion = state.conclusion().id;
    let mut out = BTreeSet::new();
    for victim in &justified {
        let mut alive: BTreeSet<NodeId> = justified.iter().map(|n| n.id).collect();
        alive.remove(&victim.id);
        loop {
            let dead: Vec<NodeId> = justified
                .iter()
                .filter(|n| alive.contains(&n.id))
                .filter(|n| n.justification.as_ref().is_some_and(|j| j.parents.iter().any(|p| !alive.contains(p))))
                .map(|n| n.id)
                .collect();
            if dead.is_empty() {
                break;
            }
            for d in dead {
                alive.remove(&d);
            }
        }
        if !alive.contains(&conclusion) {
            out.insert(victim.id);
        }
    }
    out
}

/// Whether one rule application over `statements` yields `target`, by trying
/// every selection of one statement or an ordered pair.
pub fn one_step_brute_force(statements: &[Formula], target: &Formula, catalog: &[RuleId]) -> bool {
    let n = statements.len();
    let mut selections: Vec<Vec<&Formula>> = statements.iter().map(|s| vec![s]).collect();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                selections.push(vec![&statements[i], &statements[j]]);
            }
        }
    }
    selections.into_iter().any(|sel| {
        let premises: Vec<Formula> = sel.into_iter().cloned().collect();
        catalog.iter().filter(|r| r.arity() == premises.len()).any(|&r| match enumerate_conclusions(r, &premises) {
            Ok(RuleOutcome::Finite(set)) => set.contains(target),
            Ok(RuleOutcome::Unbounded) => matches!(target, Formula::Or(l, _) if **l == premises[0]),
            Err(_) => false,
        })
    })
}

/// The network state the hint engine should start from: the givens plus the
/// longest prefix of derived statements that names a known state.
pub fn matched_key(net: &InteractionNetwork, statements: &[Formula]) -> Option<StateKey> {
    let derived: Vec<&Formula> = statements.iter().filter(|s| !net.givens.contains(s)).collect();
    (0..=derived.len()).rev().find_map(|keep| {
        let key = StateKey::from_statements(net.givens.iter().chain(derived[..keep].iter().copied()));
        net.state(&key).map(|_| key)
    })
}

/// Waypoint choice recomputed from scratch: breadth-first distances over
/// add moves, candidates at distance 2 or 3, each represented by its most
/// frequent final move, ranked by correct visits, then value, then key.
pub fn waypoint_oracle(net: &InteractionNetwork, statements: &[Formula]) -> Option<(Formula, u8)> {
    let start = matched_key(net, statements)?;
    let adds: Vec<&Transition> = net.transitions().iter().filter(|t| t.delta.is_add()).collect();
    let mut dist: BTreeMap<StateKey, usize> = BTreeMap::from([(start.clone(), 0)]);
    let mut queue = VecDeque::from([start]);
    while let Some(k) = queue.pop_front() {
        let d = dist[&k];
        if d >= 3 {
            continue;
        }
        for t in adds.iter().filter(|t| t.src == k) {
            if !dist.contains_key(&t.dst) {
                dist.insert(t.dst.clone(), d + 1);
                queue.push_back(t.dst.clone());
            }
        }
    }
    let mut candidates = Vec::new();
    for (key, &d) in &dist {
        if d < 2 {
            continue;
        }
        let last = adds
            .iter()
            .filter(|t| &t.dst == key && dist.get(&t.src) == Some(&(d - 1)))
            .max_by(|a, b| a.freq.cmp(&b.freq).then(b.src.cmp(&a.src)).then(b.delta.cmp(&a.delta)));
        let Some(last) = last else { continue };
        let s = last.delta.statement();
        if statements.contains(s) || *s == net.conclusion || one_step_brute_force(statements, s, &net.catalog) {
            continue;
        }
        let info = net.state(key).unwrap();
        candidates.push((info.correct, net.value(key).unwrap_or(f64::NEG_INFINITY), key.clone(), s.clone(), d));
    }
    candidates
        .into_iter()
        .max_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(b.2.cmp(&a.2)))
        .map(|(_, _, _, s, d)| (s, d as u8))
}
