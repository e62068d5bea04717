use std::collections::{BTreeMap, BTreeSet};

use prooftutor_core::hints::{Delta, InteractionNetwork, StateInfo, Transition};
use prooftutor_core::logic::{Formula, RuleId};
use prooftutor_core::proof::StateKey;
use rand::Rng;

/// Distinct statements for synthetic networks: conjunction chains of the
/// atoms B..=Y spelling `i` in base 24.
pub fn pool_statement(mut i: usize) -> Formula {
    let mut f = Formula::atom((b'B' + (i % 24) as u8) as char);
    i /= 24;
    while i > 0 {
        f = Formula::and(f, Formula::atom((b'B' + (i % 24) as u8) as char));
        i /= 24;
    }
    f
}

/// A random acyclic network of at most `target_states` states built from
/// random walks that add statements drawn from a pool. Walks stop on adding
/// the conclusion `Z`, which the pool contains, after `max_len` moves, or
/// before exceeding the state budget.
pub fn random_network<R: Rng>(rng: &mut R, target_states: usize, pool: usize, max_len: usize) -> InteractionNetwork {
    let givens = vec![Formula::atom('A')];
    let conclusion = Formula::atom('Z');
    let mut statements: Vec<Formula> = (0..pool).map(pool_statement).collect();
    statements.push(conclusion.clone());
    let mut states: BTreeMap<StateKey, StateInfo> = BTreeMap::new();
    let mut moves: BTreeMap<(StateKey, StateKey, Delta), u64> = BTreeMap::new();
    let mut walks = 0;
    while states.len() < target_states && walks < target_states * 20 {
        walks += 1;
        let mut current: BTreeSet<Formula> = givens.iter().cloned().collect();
        let mut trail = vec![StateKey::from_statements(&current)];
        let mut fresh = usize::from(!states.contains_key(&trail[0]));
        for _ in 0..max_len {
            let s = &statements[rng.random_range(0..statements.len())];
            if current.contains(s) {
                continue;
            }
            let mut grown = current.clone();
            grown.insert(s.clone());
            let dst = StateKey::from_statements(&grown);
            if !states.contains_key(&dst) && !trail.contains(&dst) {
                if states.len() + fresh >= target_states {
                    break;
                }
                fresh += 1;
            }
            current = grown;
            *moves
                .entry((trail.last().unwrap().clone(), dst.clone(), Delta::Added(s.clone())))
                .or_default() += 1;
            trail.push(dst);
            if *s == conclusion {
                break;
            }
        }
        let solved = current.contains(&conclusion);
        for (i, key) in trail.iter().enumerate() {
            let info = states.entry(key.clone()).or_insert_with(|| StateInfo {
                key: key.clone(),
                visits: 0,
                correct: 0,
                errors: 0,
                goal: key.statements().contains(&conclusion),
            });
            info.visits += 1;
            if solved && !trail[..i].contains(key) {
                info.correct += 1;
            }
            if rng.random_bool(0.2) {
                info.errors += 1;
            }
        }
    }
    let transitions = moves
        .into_iter()
        .map(|((src, dst, delta), freq)| Transition {
            src,
            dst,
            rule: Some(RuleId::Conj),
            delta,
            freq,
        })
        .collect();
    InteractionNetwork::from_parts(
        "random",
        givens,
        conclusion,
        RuleId::ALL.to_vec(),
        states.into_values().collect(),
        transitions,
    )
    .expect("generated network is well formed")
}
