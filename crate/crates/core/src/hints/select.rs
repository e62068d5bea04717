use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::logic::{derivable_in_one_step, Formula};
use crate::proof::{ProofState, StateKey};

use super::network::{InteractionNetwork, Transition};
use super::{Hint, HintError, HintSource, HintType};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateMatch {
    pub key: StateKey,
    /// Recent non-given statements left out to find a known state.
    pub dropped: usize,
}

/// Finds `statements` (givens first, the rest in derivation order) in the
/// network, dropping the latest derived statements until a state matches.
pub fn match_statements(net: &InteractionNetwork, statements: &[Formula]) -> Result<StateMatch, HintError> {
    let derived: Vec<&Formula> = statements.iter().filter(|s| !net.givens.contains(s)).collect();
    for dropped in 0..=derived.len() {
        let kept = &derived[..derived.len() - dropped];
        let key = StateKey::from_statements(net.givens.iter().chain(kept.iter().copied()));
        if net.state(&key).is_some() {
            return Ok(StateMatch { key, dropped });
        }
    }
    Err(HintError::NoMatch)
}

pub fn match_state(net: &InteractionNetwork, state: &ProofState) -> Result<StateMatch, HintError> {
    match_statements(net, &state.justified_statements())
}

fn prepare(net: &InteractionNetwork, statements: &[Formula]) -> Result<StateMatch, HintError> {
    if !net.is_solved() {
        return Err(HintError::Unsolved(net.problem_id.clone()));
    }
    let m = match_statements(net, statements)?;
    if net.state(&m.key).is_some_and(|s| s.goal) {
        return Err(HintError::AlreadySolved);
    }
    Ok(m)
}

/// Statements that cannot be pointed at: ones already on screen and the conclusion.
fn displayable(net: &InteractionNetwork, current: &BTreeSet<&Formula>, s: &Formula) -> bool {
    !current.contains(s) && *s != net.conclusion
}

/// The statement added by the best move out of the student's state, judged by
/// the value of the state it leads to.
pub fn next_step_hint(net: &InteractionNetwork, statements: &[Formula]) -> Result<Hint, HintError> {
    let m = prepare(net, statements)?;
    let current: BTreeSet<&Formula> = statements.iter().collect();
    let value = |k: &StateKey| net.value(k).unwrap_or(f64::NEG_INFINITY);
    let best = net
        .adds_from(&m.key)
        .filter(|t| displayable(net, &current, t.delta.statement()))
        .max_by(|a, b| {
            value(&a.dst)
                .total_cmp(&value(&b.dst))
                .then(a.freq.cmp(&b.freq))
                .then(b.dst.cmp(&a.dst))
                .then(b.delta.cmp(&a.delta))
        })
        .ok_or(HintError::NoHintAvailable)?;
    Ok(Hint {
        statement: best.delta.statement().clone(),
        hint_type: HintType::NextStep,
        target_state: best.dst.clone(),
        depth: 1,
        value: net.value(&best.dst),
        source: HintSource::Requested,
        dropped: m.dropped,
    })
}

/// Distances over add-transitions from `start`, up to `limit`.
pub(crate) fn add_distances(net: &InteractionNetwork, start: &StateKey, limit: usize) -> BTreeMap<StateKey, usize> {
    let mut dist = BTreeMap::from([(start.clone(), 0)]);
    let mut queue = VecDeque::from([start.clone()]);
    while let Some(k) = queue.pop_front() {
        let d = dist[&k];
        if d == limit {
            continue;
        }
        for t in net.adds_from(&k) {
            if !dist.contains_key(&t.dst) {
                dist.insert(t.dst.clone(), d + 1);
                queue.push_back(t.dst.clone());
            }
        }
    }
    dist
}

/// The most travelled last move into `target` along a shortest path.
fn final_move<'a>(net: &'a InteractionNetwork, dist: &BTreeMap<StateKey, usize>, target: &StateKey) -> Option<&'a Transition> {
    let d = dist[target];
    dist.iter()
        .filter(|(_, &pd)| pd + 1 == d)
        .flat_map(|(p, _)| net.adds_from(p).filter(|t| &t.dst == target))
        .max_by(|a, b| a.freq.cmp(&b.freq).then(b.src.cmp(&a.src)).then(b.delta.cmp(&a.delta)))
}

/// A statement two or three moves ahead: among states at that distance, the
/// one reached most often by correct solutions. Falls back to a Next-Step
/// hint when no such state exists.
pub fn waypoint_hint(net: &InteractionNetwork, statements: &[Formula]) -> Result<Hint, HintError> {
    let m = prepare(net, statements)?;
    let current: BTreeSet<&Formula> = statements.iter().collect();
    let dist = add_distances(net, &m.key, 3);
    let rank = |k: &StateKey| {
        let info = net.state(k).expect("state in network");
        (info.correct, net.value(k).unwrap_or(f64::NEG_INFINITY))
    };
    let mut candidates: Vec<(&StateKey, usize)> = dist.iter().filter(|(_, &d)| d >= 2).map(|(k, &d)| (k, d)).collect();
    candidates.sort_by(|(a, _), (b, _)| {
        let (c0, v0) = rank(a);
        let (c1, v1) = rank(b);
        c1.cmp(&c0).then(v1.total_cmp(&v0)).then(a.cmp(b))
    });
    let mut rejected: BTreeSet<&Formula> = BTreeSet::new();
    let mut best: Option<(&StateKey, &Transition, usize)> = None;
    for (key, d) in candidates {
        let Some(t) = final_move(net, &dist, key) else { continue };
        let s = t.delta.statement();
        if rejected.contains(s) {
            continue;
        }
        if !displayable(net, &current, s) || derivable_in_one_step(statements, s, &net.catalog) {
            rejected.insert(s);
            continue;
        }
        best = Some((key, t, d));
        break;
    }
    let Some((key, t, d)) = best else {
        return next_step_hint(net, statements);
    };
    Ok(Hint {
        statement: t.delta.statement().clone(),
        hint_type: HintType::Waypoint,
        target_state: key.clone(),
        depth: d as u8,
        value: net.value(key),
        source: HintSource::Requested,
        dropped: m.dropped,
    })
}
