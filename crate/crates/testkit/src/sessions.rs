use std::sync::Arc;

use prooftutor_core::hints::{HintType, NetworkLibrary};
use prooftutor_core::logic::{enumerate_conclusions, Formula, RuleOutcome};
use prooftutor_core::proof::{NodeKind, ProblemDef, StateKey};
use prooftutor_core::session::{Phase, Session, SessionError, SessionLog};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A session driven by random actions, with the key sequence of every
/// attempt as the live session saw it.
pub struct FuzzedSession {
    pub log: SessionLog,
    pub live_keys: Vec<Vec<StateKey>>,
    /// Largest number of unjustified hint nodes ever on screen at once.
    pub max_pending: usize,
}

fn random_action(rng: &mut ChaCha8Rng, session: &mut Session, t: u64) -> Result<(), SessionError> {
    let a = session.current().expect("active");
    let state = &a.state;
    let justified: Vec<_> = state.justified_nodes().into_iter().map(|n| (n.id, n.statement.clone())).collect();
    match rng.random_range(0..100) {
        0..70 => {
            let rule = state.catalog[rng.random_range(0..state.catalog.len())];
            let arity = rule.arity().min(justified.len());
            let mut picks: Vec<usize> = Vec::new();
            while picks.len() < arity {
                let i = rng.random_range(0..justified.len());
                if !picks.contains(&i) {
                    picks.push(i);
                }
            }
            let premises: Vec<Formula> = picks.iter().map(|&i| justified[i].1.clone()).collect();
            let ids: Vec<_> = picks.iter().map(|&i| justified[i].0).collect();
            let claimed = match enumerate_conclusions(rule, &premises) {
                Ok(RuleOutcome::Finite(set)) if rng.random_bool(0.8) => {
                    let all: Vec<Formula> = set.into_iter().collect();
                    Some(all[rng.random_range(0..all.len())].clone())
                }
                Ok(RuleOutcome::Unbounded) if rng.random_bool(0.8) => {
                    Some(Formula::or(premises[0].clone(), Formula::atom('Q')))
                }
                _ if rng.random_bool(0.5) => Some(Formula::not(premises.first().cloned().unwrap_or(Formula::atom('A')))),
                _ => None,
            };
            session.step(&ids, rule, claimed.as_ref(), t).map(|_| ())
        }
        70..80 => match session.request_hint(t) {
            Err(SessionError::HintAlreadyPresent | SessionError::NoHint(_) | SessionError::HintsDisabled) => Ok(()),
            other => other.map(|_| ()),
        },
        80..92 => {
            let deletable: Vec<_> = state
                .nodes()
                .iter()
                .filter(|n| matches!(n.kind, NodeKind::Derived | NodeKind::Hint))
                .map(|n| n.id)
                .collect();
            if deletable.is_empty() {
                return Ok(());
            }
            let id = deletable[rng.random_range(0..deletable.len())];
            session.delete(id, t).map(|_| ())
        }
        92..96 => {
            let seed = rng.random();
            session.restart(seed, t).map(|_| ())
        }
        _ => session.skip(t),
    }
}

/// Runs up to `actions` random actions over `problems` in the training phase.
pub fn fuzz_session(
    seed: u64,
    problems: &[ProblemDef],
    condition: Option<HintType>,
    networks: &Arc<NetworkLibrary>,
    actions: usize,
) -> FuzzedSession {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut session = Session::new(format!("fuzz-{seed}"), format!("student-{seed}"), condition, Arc::clone(networks));
    let mut live_keys = Vec::new();
    let mut max_pending = 0;
    let mut t = 1_000;
    for _ in 0..actions {
        t += rng.random_range(1_000..30_000);
        if session.current().is_none() {
            if let Some(done) = session.last_finished() {
                live_keys.push(done.trace.keys.clone());
            }
            let p = &problems[rng.random_range(0..problems.len())];
            let sched_seed = rng.random();
            session.start_problem(p, Phase::Training, false, sched_seed, t).unwrap();
            continue;
        }
        let before = session.current().map(|a| a.attempt);
        random_action(&mut rng, &mut session, t).unwrap();
        if let (Some(b), Some(a)) = (before, session.current()) {
            if a.attempt != b {
                live_keys.push(session.last_finished().unwrap().trace.keys.clone());
            }
        }
        if let Some(a) = session.current() {
            let pending = a
                .state
                .nodes()
                .iter()
                .filter(|n| n.kind == NodeKind::Hint && !n.is_justified())
                .count();
            max_pending = max_pending.max(pending);
        }
    }
    if let Some(a) = session.current() {
        live_keys.push(a.trace.keys.clone());
    } else if let Some(done) = session.last_finished() {
        live_keys.push(done.trace.keys.clone());
    }
    FuzzedSession {
        log: session.into_log(),
        live_keys,
        max_pending,
    }
}
